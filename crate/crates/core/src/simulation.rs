//! The event loop: carries forwarder and application effects across faces,
//! links and the wireless medium, and feeds the metrics blackboards.

use std::collections::VecDeque;
use std::io::Write;

use thiserror::Error;

use crate::apps::{AppEffect, TimerToken};
use crate::dump::{Direction, DumpError, DumpRecord, DumpWriter};
use crate::forwarder::{Action, DropReason, FaceId, LOCAL_FACE};
use crate::message::{InterestReturn, Message, ReturnCode};
use crate::metrics::{MetricsCollector, SummaryReport};
use crate::scenario::ScenarioConfig;
use crate::sim::{EventId, RunSummary, Scheduler, SimTime};
use crate::topology::{build_network, BuildError, Network};
use crate::transport::{Delivery, FaceKind, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Deliver {
        node: NodeId,
        face: FaceId,
        msg: Message,
        /// Set on the first hop of an Interest the app re-issued.
        retransmission: bool,
    },
    DownloadTick(NodeId),
    RetxTimeout(NodeId, TimerToken),
    PitExpire(NodeId),
    PositionUpdate,
    Sample,
    StopApps,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("t={time} {node}: {message}")]
    Node {
        time: SimTime,
        node: String,
        message: String,
    },
    #[error("packet dump: {0}")]
    Dump(#[from] DumpError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropCounts {
    pub unsolicited: u64,
    pub no_pit_entry: u64,
    pub loops: u64,
    pub unserved_local: u64,
}

/// One PIT size change: `(time, node, new size)`.
pub type PitTracePoint = (SimTime, NodeId, usize);

#[derive(Debug, Default)]
struct NodeTimers {
    tick: Option<EventId>,
    retx: Option<EventId>,
}

pub struct Simulation {
    pub config: ScenarioConfig,
    pub network: Network,
    pub collector: MetricsCollector,
    pub drops: DropCounts,
    pub pit_trace: Option<Vec<PitTracePoint>>,
    scheduler: Scheduler<Event>,
    timers: Vec<NodeTimers>,
    dump: Option<DumpWriter<Box<dyn Write + Send>>>,
    apps_stopped: bool,
}

struct WorkItem {
    face: FaceId,
    msg: Message,
    retransmission: bool,
}

impl Simulation {
    /// Builds the network and schedules start-up events: the t = 0 sample,
    /// the first download ticks and, if configured, the app stop.
    pub fn new(config: ScenarioConfig) -> Result<Self, BuildError> {
        let network = build_network(&config)?;
        let mut sim = Simulation {
            timers: (0..network.nodes.len()).map(|_| NodeTimers::default()).collect(),
            config,
            network,
            collector: MetricsCollector::new(),
            drops: DropCounts::default(),
            pit_trace: None,
            scheduler: Scheduler::new(),
            dump: None,
            apps_stopped: false,
        };
        sim.scheduler.schedule(Event::Sample, SimTime::ZERO);
        for i in 0..sim.network.nodes.len() {
            let node = NodeId(i as u32);
            if let Some(app) = sim.network.nodes[i].download.as_mut() {
                let effects = app.start(SimTime::ZERO);
                let mut work = VecDeque::new();
                sim.apply_effects(node, effects, &mut work);
            }
        }
        if sim.network.nodes.iter().any(|n| n.mobility.is_mobile()) {
            let step = SimTime::from_secs_f64(sim.config.arena.position_update_interval_s);
            sim.scheduler.schedule(Event::PositionUpdate, step);
        }
        if let Some(stop) = sim.config.simulation.apps_stop_s {
            sim.scheduler.schedule(Event::StopApps, SimTime::from_secs_f64(stop));
        }
        Ok(sim)
    }

    pub fn with_packet_dump(mut self, out: Box<dyn Write + Send>) -> Self {
        self.dump = Some(DumpWriter::new(out));
        self
    }

    pub fn with_pit_trace(mut self) -> Self {
        self.pit_trace = Some(Vec::new());
        self
    }

    pub fn now(&self) -> SimTime {
        self.scheduler.now()
    }

    pub fn events_processed(&self) -> u64 {
        self.scheduler.events_processed()
    }

    pub fn pit_total(&self) -> usize {
        self.network.nodes.iter().map(|n| n.forwarder.pit.len()).sum()
    }

    /// Stops every download app at the current time.
    pub fn stop_apps(&mut self) {
        if self.apps_stopped {
            return;
        }
        self.apps_stopped = true;
        for i in 0..self.network.nodes.len() {
            let node = NodeId(i as u32);
            if let Some(tick) = self.timers[i].tick.take() {
                self.scheduler.cancel(tick);
            }
            if let Some(app) = self.network.nodes[i].download.as_mut() {
                let effects = app.stop();
                let mut work = VecDeque::new();
                self.apply_effects(node, effects, &mut work);
            }
        }
    }

    /// Processes every event up to and including `t_end`.
    pub fn run_until(&mut self, t_end: SimTime) -> Result<RunSummary, SimError> {
        let started = std::time::Instant::now();
        let before = self.scheduler.events_processed();
        while let Some((now, _, event)) = self.scheduler.pop_until(t_end) {
            self.handle(now, event)?;
        }
        self.scheduler.advance_to(t_end);
        if let Some(d) = self.dump.as_mut() {
            d.flush()?;
        }
        Ok(RunSummary {
            events_processed: self.scheduler.events_processed() - before,
            wall_time: started.elapsed(),
        })
    }

    /// Runs to the configured duration, sampling on the configured grid.
    pub fn run(&mut self) -> Result<RunSummary, SimError> {
        let end = SimTime::from_secs_f64(self.config.simulation.duration_s);
        self.run_until(end)
    }

    /// End-of-run report at the current time.
    pub fn finalize(&mut self) -> SummaryReport {
        let now = self.now();
        self.collector.finalize(now, &mut self.network.metrics)
    }

    fn handle(&mut self, now: SimTime, event: Event) -> Result<(), SimError> {
        match event {
            Event::Deliver {
                node,
                face,
                msg,
                retransmission,
            } => {
                self.record_dump(now, node, face, Direction::Received, &msg)?;
                if retransmission {
                    self.network.metrics[node.0 as usize].record_retransmission_received(msg.encoded_size());
                }
                let mut work = VecDeque::from([WorkItem {
                    face,
                    msg,
                    retransmission: false,
                }]);
                self.process(node, now, &mut work)?;
            }
            Event::DownloadTick(node) => {
                self.timers[node.0 as usize].tick = None;
                let effects = match self.network.nodes[node.0 as usize].download.as_mut() {
                    Some(app) => app.download_tick(now),
                    None => return Err(self.node_error(now, node, "download tick without a download app")),
                };
                self.run_effects(node, effects, now)?;
            }
            Event::RetxTimeout(node, token) => {
                self.timers[node.0 as usize].retx = None;
                let effects = match self.network.nodes[node.0 as usize].download.as_mut() {
                    Some(app) => app.on_download_timeout(token, now),
                    None => Vec::new(),
                };
                self.run_effects(node, effects, now)?;
            }
            Event::PitExpire(node) => {
                let n = node.0 as usize;
                if self.network.nodes[n].forwarder.pit_expire(now) > 0 {
                    self.note_pit(node, now);
                }
            }
            Event::PositionUpdate => {
                self.refresh_positions(now);
                let step = SimTime::from_secs_f64(self.config.arena.position_update_interval_s);
                self.scheduler.schedule(Event::PositionUpdate, now + step);
            }
            Event::Sample => {
                for (node, m) in self.network.nodes.iter().zip(self.network.metrics.iter_mut()) {
                    m.observe_cs(node.forwarder.cs.len());
                }
                self.collector.sample_time_series(now, &mut self.network.metrics);
                let step = SimTime::from_secs_f64(self.config.simulation.metric_sample_interval_s);
                self.scheduler.schedule(Event::Sample, now + step);
            }
            Event::StopApps => self.stop_apps(),
        }
        Ok(())
    }

    fn refresh_positions(&mut self, now: SimTime) {
        for node in &mut self.network.nodes {
            if node.mobility.is_mobile() {
                let p = node.mobility.position_at(now);
                self.network.registry.update_position(node.id, p);
            }
        }
    }

    fn node_error(&self, time: SimTime, node: NodeId, message: impl Into<String>) -> SimError {
        SimError::Node {
            time,
            node: self.network.nodes[node.0 as usize].name.clone(),
            message: message.into(),
        }
    }

    fn record_dump(
        &mut self,
        time: SimTime,
        node: NodeId,
        face: FaceId,
        direction: Direction,
        msg: &Message,
    ) -> Result<(), SimError> {
        if let Some(d) = self.dump.as_mut() {
            d.write(&DumpRecord {
                time,
                node: node.0,
                face: face.0,
                direction,
                message: msg.clone(),
            })?;
        }
        Ok(())
    }

    fn note_pit(&mut self, node: NodeId, now: SimTime) {
        let len = self.network.nodes[node.0 as usize].forwarder.pit.len();
        let stats = &mut self.network.metrics[node.0 as usize].pit;
        if stats.current != len {
            stats.set(now, len);
            if let Some(trace) = self.pit_trace.as_mut() {
                trace.push((now, node, len));
            }
        }
    }

    fn run_effects(&mut self, node: NodeId, effects: Vec<AppEffect>, now: SimTime) -> Result<(), SimError> {
        let mut work = VecDeque::new();
        self.apply_effects(node, effects, &mut work);
        self.process(node, now, &mut work)
    }

    /// Carries out app effects; Interests to send are queued on `work`.
    fn apply_effects(&mut self, node: NodeId, effects: Vec<AppEffect>, work: &mut VecDeque<WorkItem>) {
        let n = node.0 as usize;
        for effect in effects {
            match effect {
                AppEffect::SendInterest {
                    interest,
                    retransmission,
                } => {
                    let msg = Message::Interest(interest);
                    self.network.metrics[n].record_interest_sent(msg.encoded_size(), retransmission);
                    work.push_back(WorkItem {
                        face: LOCAL_FACE,
                        msg,
                        retransmission,
                    });
                }
                AppEffect::StartTimer { at, token } => {
                    if let Some(old) = self.timers[n].retx.take() {
                        self.scheduler.cancel(old);
                    }
                    self.timers[n].retx = Some(self.scheduler.schedule(Event::RetxTimeout(node, token), at));
                }
                AppEffect::StopTimer => {
                    if let Some(old) = self.timers[n].retx.take() {
                        self.scheduler.cancel(old);
                    }
                }
                AppEffect::ScheduleTick { at } => {
                    if !self.apps_stopped {
                        self.timers[n].tick = Some(self.scheduler.schedule(Event::DownloadTick(node), at));
                    }
                }
                AppEffect::DownloadStarted => self.network.metrics[n].downloads_started += 1,
                AppEffect::SegmentDone { duration } => self.network.metrics[n].record_segment(duration),
                AppEffect::DownloadDone { duration } => self.network.metrics[n].record_download(duration),
            }
        }
    }

    /// Runs queued inputs through the node's forwarder until none are left.
    fn process(&mut self, node: NodeId, now: SimTime, work: &mut VecDeque<WorkItem>) -> Result<(), SimError> {
        let n = node.0 as usize;
        while let Some(item) = work.pop_front() {
            let actions = self.network.nodes[n].forwarder.on_message(item.face, item.msg, now);
            for action in actions {
                match action {
                    Action::Send(face, msg) => {
                        let retx = item.retransmission && matches!(msg, Message::Interest(_));
                        self.transmit(node, face, msg, retx, now)?;
                    }
                    Action::DeliverLocal(msg) => self.deliver_local(node, msg, now, work),
                    Action::CacheInsert { .. } => {
                        let len = self.network.nodes[n].forwarder.cs.len();
                        self.network.metrics[n].observe_cs(len);
                    }
                    Action::RecordHit => self.network.metrics[n].record_cache_lookup(true),
                    Action::RecordMiss => self.network.metrics[n].record_cache_lookup(false),
                    Action::PitCreated { expiry_at } => {
                        self.scheduler.schedule(Event::PitExpire(node), expiry_at);
                    }
                    Action::Drop(reason) => match reason {
                        DropReason::Unsolicited => self.drops.unsolicited += 1,
                        DropReason::NoPitEntry => self.drops.no_pit_entry += 1,
                        DropReason::Loop => self.drops.loops += 1,
                    },
                }
            }
            self.note_pit(node, now);
        }
        Ok(())
    }

    fn deliver_local(&mut self, node: NodeId, msg: Message, now: SimTime, work: &mut VecDeque<WorkItem>) {
        let n = node.0 as usize;
        match msg {
            Message::Interest(interest) => {
                let reply = match self.network.nodes[n].server.as_mut() {
                    Some(server) => server.serve_interest(&interest),
                    None => {
                        self.drops.unserved_local += 1;
                        Message::InterestReturn(InterestReturn {
                            original: interest,
                            return_code: ReturnCode::NoRoute,
                        })
                    }
                };
                work.push_back(WorkItem {
                    face: LOCAL_FACE,
                    msg: reply,
                    retransmission: false,
                });
            }
            Message::ContentObject(obj) => {
                if let Some(app) = self.network.nodes[n].download.as_mut() {
                    let effects = app.on_content(&obj, now);
                    self.apply_effects(node, effects, work);
                }
            }
            Message::InterestReturn(ret) => {
                if let Some(app) = self.network.nodes[n].download.as_mut() {
                    let effects = app.on_interest_return(&ret, now);
                    self.apply_effects(node, effects, work);
                }
            }
        }
    }

    fn transmit(&mut self, node: NodeId, face: FaceId, msg: Message, retransmission: bool, now: SimTime) -> Result<(), SimError> {
        let kind = match self.network.nodes[node.0 as usize].face(face) {
            Some(f) => f.kind,
            None => return Err(self.node_error(now, node, format!("send on unknown {face}"))),
        };
        self.record_dump(now, node, face, Direction::Sent, &msg)?;
        let bytes = msg.encoded_size();
        let deliveries: Vec<Delivery> = match kind {
            FaceKind::Wired { link } => {
                let l = &mut self.network.links[link];
                let end = l.end_of(node, face).expect("wired face belongs to its link");
                vec![l.send(end, bytes, now)]
            }
            FaceKind::Wireless(_) => self.network.registry.wireless_send(node, face, bytes, now),
            FaceKind::LocalApp => {
                return Err(self.node_error(now, node, "forwarder sent on the local face"));
            }
        };
        for d in deliveries {
            self.scheduler.schedule(
                Event::Deliver {
                    node: d.to.node,
                    face: d.to.face,
                    msg: msg.clone(),
                    retransmission,
                },
                d.at,
            );
        }
        Ok(())
    }
}
