//! Acceptance suite. Runs every criterion and prints one PASS/FAIL line each;
//! exits non-zero if any criterion fails.

use std::collections::{HashSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ccnsim::apps::{advertise_prefixes, WiredFaces};
use ccnsim::forwarder::{Action, ContentStore, FaceId, Fib, Forwarder};
use ccnsim::message::{ContentObject, Interest, InterestReturn, Message, ReturnCode, MAX_TOTAL_SEGMENTS};
use ccnsim::metrics::{SeriesRow, SummaryReport};
use ccnsim::name::{ContentName, Prefix};
use ccnsim::output;
use ccnsim::runner::{self, Overrides};
use ccnsim::scenario::{parse_scenario, ScenarioConfig};
use ccnsim::sim::{rng_stream, SimTime};
use ccnsim::simulation::Simulation;
use ccnsim::transport::{transmission_time, Endpoint, NodeId};

fn scenario(name: &str) -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    parse_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Conservation findings for one run.
#[derive(Debug, Clone)]
struct Conservation {
    label: String,
    lookups: u64,
    hits_plus_misses: u64,
    cs_violations: Vec<String>,
    unrequested: u64,
    pit_after_quiescence: usize,
}

impl Conservation {
    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.lookups != self.hits_plus_misses {
            out.push(format!(
                "{}: {} CS lookups but hits + misses = {}",
                self.label, self.lookups, self.hits_plus_misses
            ));
        }
        out.extend(self.cs_violations.iter().map(|v| format!("{}: {v}", self.label)));
        if self.unrequested > 0 {
            out.push(format!("{}: {} unrequested app deliveries", self.label, self.unrequested));
        }
        if self.pit_after_quiescence > 0 {
            out.push(format!(
                "{}: {} PIT entries left after quiescence",
                self.label, self.pit_after_quiescence
            ));
        }
        out
    }
}

struct CheckedRun {
    report: SummaryReport,
    rows: Vec<SeriesRow>,
    sim: Simulation,
    conservation: Conservation,
}

/// Upper bound on the one-way latency of any loop-free path: every link's
/// delay plus the time to clock out a full Content Object on it.
fn path_latency_bound(cfg: &ScenarioConfig) -> SimTime {
    let co = 1060 + cfg
        .nodes
        .iter()
        .filter_map(|n| n.catalog.as_ref())
        .map(|c| c.segment_size as usize)
        .max()
        .unwrap_or(0);
    let wired: u64 = cfg
        .links
        .iter()
        .map(|l| (SimTime::from_secs_f64(l.delay_s) + transmission_time(co, l.data_rate_bps)).as_nanos())
        .sum();
    let wireless: u64 = cfg
        .nodes
        .iter()
        .filter_map(|n| n.wireless.as_ref())
        .map(|w| transmission_time(co, w.data_rate_bps).as_nanos())
        .sum();
    SimTime::from_nanos(wired + wireless)
}

/// Runs to the configured duration, then stops the apps and lets the
/// network drain for one Interest lifetime plus the path bound.
fn run_checked(label: &str, cfg: ScenarioConfig) -> CheckedRun {
    let max_lifetime = cfg
        .nodes
        .iter()
        .filter_map(|n| n.download.as_ref())
        .map(|d| SimTime::from_secs_f64(d.interest_lifetime_s))
        .max()
        .unwrap_or(SimTime::ZERO);
    let drain = max_lifetime + path_latency_bound(&cfg);
    let mut sim = Simulation::new(cfg).expect("scenario builds");
    sim.run().expect("run succeeds");
    let report = sim.finalize();
    let rows = sim.collector.rows.clone();

    let lookups: u64 = sim.network.nodes.iter().map(|n| n.forwarder.cs_lookups()).sum();
    let hits_plus_misses = report.totals.cache.lookups();
    let mut cs_violations = Vec::new();
    for (node, m) in sim.network.nodes.iter().zip(&sim.network.metrics) {
        if m.cs_overflow_samples > 0 || m.cs_peak > m.cs_capacity || node.forwarder.cs.len() > m.cs_capacity {
            cs_violations.push(format!(
                "{} CS peaked at {} with capacity {}",
                node.name, m.cs_peak, m.cs_capacity
            ));
        }
    }
    let unrequested: u64 = sim
        .network
        .nodes
        .iter()
        .filter_map(|n| n.download.as_ref())
        .map(|a| a.stats.unrequested_deliveries)
        .sum();

    sim.stop_apps();
    let until = sim.now() + drain;
    sim.run_until(until).expect("drain succeeds");
    let conservation = Conservation {
        label: label.to_string(),
        lookups,
        hits_plus_misses,
        cs_violations,
        unrequested,
        pit_after_quiescence: sim.pit_total(),
    };
    CheckedRun {
        report,
        rows,
        sim,
        conservation,
    }
}

struct CatalogRun {
    catalog_size: u32,
    seed: u64,
    hit_ratio: Option<f64>,
    rows: Vec<SeriesRow>,
}

fn catalog_sweep(ledger: &mut Vec<Conservation>) -> Vec<CatalogRun> {
    let base = scenario("catalog_sweep_low.scn");
    let mut jobs = Vec::new();
    for size in [100u32, 1000, 10000] {
        for seed in [1u64, 2, 3] {
            let mut cfg = base.clone();
            cfg.simulation.duration_s = 7200.0;
            cfg.simulation.seed = seed;
            cfg.set_catalog_size(size);
            jobs.push((size, seed, cfg));
        }
    }
    let results: Vec<(CatalogRun, Conservation)> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|(size, seed, cfg)| {
                s.spawn(move || {
                    let run = run_checked(&format!("catalog {size} seed {seed}"), cfg);
                    (
                        CatalogRun {
                            catalog_size: size,
                            seed,
                            hit_ratio: run.report.hit_ratio,
                            rows: run.rows,
                        },
                        run.conservation,
                    )
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread")).collect()
    });
    results
        .into_iter()
        .map(|(run, c)| {
            ledger.push(c);
            run
        })
        .collect()
}

fn criterion_1(runs: &[CatalogRun]) -> Outcome {
    let mut detail = Vec::new();
    for seed in [1u64, 2, 3] {
        let ratio = |size: u32| -> Result<f64, String> {
            runs.iter()
                .find(|r| r.seed == seed && r.catalog_size == size)
                .and_then(|r| r.hit_ratio)
                .ok_or_else(|| format!("seed {seed} catalog {size}: no hit ratio"))
        };
        let (low, mid, high) = (ratio(100)?, ratio(1000)?, ratio(10000)?);
        check(low - mid >= 0.02 && mid - high >= 0.02, || {
            format!("seed {seed}: hit ratios {low:.4} / {mid:.4} / {high:.4} not separated by 0.02")
        })?;
        detail.push(format!("seed {seed}: {low:.3} > {mid:.3} > {high:.3}"));
    }
    Ok(detail.join("; "))
}

fn criterion_2(runs: &[CatalogRun]) -> Outcome {
    let mut worst_first: f64 = 0.0;
    for r in runs {
        let series: Vec<f64> = r.rows.iter().filter_map(|row| row.hit_ratio_cum).collect();
        let label = format!("catalog {} seed {}", r.catalog_size, r.seed);
        let (&first, &last) = match (series.first(), series.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(format!("{label}: empty hit-ratio series")),
        };
        check(first < 0.05, || format!("{label}: first sampled hit ratio {first}"))?;
        check(last > first, || format!("{label}: final {last} does not exceed first {first}"))?;
        let q = series.len() / 4;
        check(q > 0, || format!("{label}: only {} samples", series.len()))?;
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let (head, tail) = (mean(&series[..q]), mean(&series[series.len() - q..]));
        check(tail > head, || {
            format!("{label}: last-quartile mean {tail} <= first-quartile mean {head}")
        })?;
        worst_first = worst_first.max(first);
    }
    Ok(format!("{} runs warm up; largest first sample {worst_first:.4}", runs.len()))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ccnsim-acceptance-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn criterion_3(ledger: &mut Vec<Conservation>) -> Outcome {
    let started = Instant::now();
    let cfg = scenario("catalog_sweep_low.scn");
    let overrides = Overrides {
        seed: Some(7),
        duration_s: Some(7200.0),
        ..Overrides::default()
    };
    let (a, b) = (temp_dir("replay-a"), temp_dir("replay-b"));
    runner::run(&cfg, &overrides, &a).map_err(|e| e.to_string())?;
    runner::run(&cfg, &overrides, &b).map_err(|e| e.to_string())?;
    for file in [output::NETWORK_METRICS_FILE, output::NODE_METRICS_FILE, output::SUMMARY_FILE] {
        let x = fs::read(a.join(file)).map_err(|e| e.to_string())?;
        let y = fs::read(b.join(file)).map_err(|e| e.to_string())?;
        check(!x.is_empty() && x == y, || format!("{file} differs between replays"))?;
    }
    let _ = fs::remove_dir_all(&a);
    let _ = fs::remove_dir_all(&b);
    let mut replay = cfg.clone();
    overrides.apply(&mut replay).map_err(|e| e.to_string())?;
    ledger.push(run_checked("replay seed 7", replay).conservation);
    let elapsed = started.elapsed();
    check(elapsed.as_secs() < 60, || format!("took {elapsed:?}"))?;
    Ok(format!("3 files byte-identical across two runs ({elapsed:.1?})"))
}

fn criterion_4(ledger: &mut Vec<Conservation>) -> Outcome {
    let cfg = scenario("line_latency.scn");
    let name = ContentName::parse("ccnx:/srv1/content0").expect("name").with_segment(0);
    let interest = Message::Interest(Interest::new(name.clone()));
    let object = Message::ContentObject(ContentObject {
        name,
        payload_size: 1000,
        expiry_ms: 3_600_000,
        total_segments: 1,
    });
    check(interest.encoded_size() == 50 && object.encoded_size() == 1060, || {
        format!(
            "encoded sizes {} / {} (expected 50 / 1060)",
            interest.encoded_size(),
            object.encoded_size()
        )
    })?;

    // Per hop: bits / rate + propagation delay; two hops each way.
    let rate = 10_000_000f64;
    let delay = 0.005;
    let hop = |bytes: f64| bytes * 8.0 / rate + delay;
    let oracle_s = 2.0 * hop(50.0) + 2.0 * hop(1060.0);

    let run = run_checked("line latency", cfg);
    let app = run.sim.network.nodes[0].download.as_ref().ok_or("client has no download app")?;
    check(app.records.len() >= 2, || format!("{} downloads recorded", app.records.len()))?;
    let first = app.records[0].segment_durations.first().ok_or("first download has no segment")?;
    let first_s = first.as_secs_f64();
    check((first_s - oracle_s).abs() <= 1e-6, || {
        format!("first segment took {first_s} s, oracle {oracle_s} s")
    })?;
    let second = app.records[1].duration().ok_or("second download did not finish")?;
    let first_total = app.records[0].duration().ok_or("first download did not finish")?;
    check(second < first_total, || format!("second download {second} not faster than {first_total}"))?;
    let ar = run.sim.network.node_id("ar").ok_or("no node ar")?;
    let ar_hits = run.sim.network.metrics[ar.0 as usize].cache.hits;
    check(ar_hits >= 1, || "no cache hit recorded at the access router".into())?;
    ledger.push(run.conservation);
    Ok(format!(
        "first segment {:.3} ms = oracle {:.3} ms; repeat {:.3} ms with {ar_hits} AR hit(s)",
        first_s * 1e3,
        oracle_s * 1e3,
        second.as_secs_f64() * 1e3
    ))
}

fn random_name(rng: &mut ChaCha8Rng, alphabet: &[&str], max_len: usize) -> Vec<String> {
    let len = rng.random_range(1..=max_len);
    (0..len).map(|_| alphabet.choose(rng).expect("alphabet").to_string()).collect()
}

fn to_name(comps: &[String]) -> ContentName {
    ContentName::parse(&format!("ccnx:/{}", comps.join("/"))).expect("valid name")
}

fn lpm_instance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let alphabet = ["a", "b", "c"];
    let mut fib = Fib::new();
    let mut routes: Vec<(Prefix, FaceId, u32)> = Vec::new();
    for _ in 0..rng.random_range(0..12) {
        let len = rng.random_range(0..=3);
        let comps: Vec<String> = (0..len).map(|_| alphabet.choose(rng).unwrap().to_string()).collect();
        let prefix = Prefix::parse(&format!("ccnx:/{}", comps.join("/"))).expect("prefix");
        let face = FaceId(rng.random_range(1..5));
        let metric = rng.random_range(0..4);
        fib.insert(prefix.clone(), face, metric);
        routes.retain(|(p, f, _)| !(p == &prefix && *f == face));
        routes.push((prefix, face, metric));
    }
    for _ in 0..8 {
        let name = to_name(&random_name(rng, &alphabet, 4));
        let expected = routes
            .iter()
            .filter(|(p, _, _)| p.matches(&name))
            .max_by(|x, y| {
                x.0.len()
                    .cmp(&y.0.len())
                    .then((y.2, y.1).cmp(&(x.2, x.1)))
            })
            .map(|(p, f, m)| (p.clone(), *f, *m));
        let got = fib.longest_prefix_match(&name).map(|e| (e.prefix, e.face, e.metric));
        check(got == expected, || format!("LPM for {name}: got {got:?}, scan says {expected:?}"))?;
    }
    Ok(())
}

fn cs_instance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let capacity = rng.random_range(0..6);
    let mut cs = ContentStore::new(capacity);
    let mut reference: VecDeque<ContentName> = VecDeque::new();
    for step in 0..40u64 {
        let name = to_name(&[format!("k{}", rng.random_range(0..10))]).with_segment(0);
        let obj = ContentObject {
            name: name.clone(),
            payload_size: 1,
            expiry_ms: 0,
            total_segments: 1,
        };
        let evicted = cs.insert(obj, SimTime::from_nanos(step)).map(|e| e.object.name);
        let mut expected_evicted = None;
        if capacity > 0 && !reference.contains(&name) {
            if reference.len() == capacity {
                expected_evicted = reference.pop_front();
            }
            reference.push_back(name);
        }
        check(evicted == expected_evicted, || {
            format!("step {step}: evicted {evicted:?}, reference {expected_evicted:?}")
        })?;
        let order: Vec<&ContentName> = cs.fifo_order().collect();
        let ref_order: Vec<&ContentName> = reference.iter().collect();
        check(order == ref_order, || format!("step {step}: FIFO order diverged"))?;
        check(cs.len() <= capacity, || format!("step {step}: {} entries over {capacity}", cs.len()))?;
    }
    Ok(())
}

fn pit_instance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut fwd = Forwarder::new(rng.random_range(0..3));
    fwd.fib.insert(Prefix::parse("ccnx:/p").expect("prefix"), FaceId(9), 1);
    let mut now = SimTime::ZERO;
    for _ in 0..30 {
        now = now + SimTime::from_millis(rng.random_range(0..400));
        fwd.pit_expire(now);
        let name = to_name(&["p".to_string(), format!("c{}", rng.random_range(0..3))]).with_segment(rng.random_range(0..2));
        let face = FaceId(rng.random_range(1..5));
        match rng.random_range(0..4) {
            0 => {
                let obj = ContentObject {
                    name,
                    payload_size: 10,
                    expiry_ms: 0,
                    total_segments: 2,
                };
                fwd.on_content_object(FaceId(9), obj, now);
            }
            1 => {
                let ret = InterestReturn {
                    original: Interest::new(name),
                    return_code: ReturnCode::NoRoute,
                };
                fwd.on_interest_return(FaceId(9), ret, now);
            }
            _ => {
                let pending = fwd.pit.get(&name).is_some();
                let cached = fwd.cs.contains(&name);
                let before = fwd.pit.len();
                let actions = fwd.on_interest(face, Interest::new(name.clone()), now);
                let forwarded = actions
                    .iter()
                    .filter(|a| matches!(a, Action::Send(_, Message::Interest(_))))
                    .count();
                if pending && !cached {
                    check(forwarded == 0 && fwd.pit.len() == before, || {
                        format!("aggregated Interest for {name} was forwarded again")
                    })?;
                    check(fwd.pit.get(&name).is_some_and(|e| e.in_faces.contains(&face) || e.out_faces.contains(&face)), || {
                        format!("aggregated face {face} not recorded for {name}")
                    })?;
                }
            }
        }
        let names: Vec<&ContentName> = fwd.pit.iter().map(|e| &e.name).collect();
        let unique: HashSet<&ContentName> = names.iter().copied().collect();
        check(names.len() == unique.len(), || "two live PIT entries share a name".into())?;
        check(fwd.pit.iter().all(|e| e.expiry_at > now), || "expired PIT entry still live".into())?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let mut rng = rng_stream(5, "acceptance.forwarder");
    let n = 10_000;
    for i in 0..n {
        lpm_instance(&mut rng).map_err(|e| format!("instance {i}: {e}"))?;
        cs_instance(&mut rng).map_err(|e| format!("instance {i}: {e}"))?;
        pit_instance(&mut rng).map_err(|e| format!("instance {i}: {e}"))?;
    }
    let elapsed = started.elapsed();
    check(elapsed.as_secs() < 30, || format!("took {elapsed:?}"))?;
    Ok(format!("{n} instances each of LPM, FIFO CS and PIT aggregation ({elapsed:.1?})"))
}

fn criterion_6(ledger: &[Conservation]) -> Outcome {
    let problems: Vec<String> = ledger.iter().flat_map(Conservation::problems).collect();
    if !problems.is_empty() {
        return Err(problems.join("; "));
    }
    let lookups: u64 = ledger.iter().map(|c| c.lookups).sum();
    Ok(format!("{} runs conserve lookups ({lookups} total), CS bounds, app deliveries and PIT drain", ledger.len()))
}

fn criterion_7() -> Outcome {
    let retx = |file: &str| -> Result<u64, String> {
        let mut sim = Simulation::new(scenario(file)).map_err(|e| e.to_string())?;
        sim.run().map_err(|e| e.to_string())?;
        let rows = &sim.collector.rows;
        let last = rows.last().ok_or("no samples")?;
        Ok(last.retransmission_bytes_cum)
    };
    let gap = retx("coverage_gap.scn")?;
    let full = retx("coverage_complete.scn")?;
    check(gap > 0, || "coverage gap produced no retransmissions".into())?;
    check(full == 0, || format!("full coverage retransmitted {full} bytes"))?;
    Ok(format!("retransmission bytes: {gap} with a coverage gap, {full} with full coverage"))
}

fn random_message(rng: &mut ChaCha8Rng) -> Message {
    let comps: Vec<Vec<u8>> = (0..rng.random_range(1..6))
        .map(|_| (0..rng.random_range(1..12)).map(|_| rng.random()).collect())
        .collect();
    let name = ContentName::from_components(comps).expect("non-empty").with_segment(rng.random());
    let interest = Interest {
        name: name.clone(),
        hop_limit: rng.random(),
        lifetime_ms: rng.random_range(1..=u16::MAX),
    };
    match rng.random_range(0..3) {
        0 => Message::Interest(interest),
        1 => Message::ContentObject(ContentObject {
            name,
            payload_size: rng.random_range(1..4096),
            expiry_ms: rng.random(),
            total_segments: rng.random_range(0..=MAX_TOTAL_SEGMENTS),
        }),
        _ => Message::InterestReturn(InterestReturn {
            original: interest,
            return_code: if rng.random() {
                ReturnCode::NoRoute
            } else {
                ReturnCode::HopLimitExceeded
            },
        }),
    }
}

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let mut rng = rng_stream(8, "acceptance.codec");
    let n = 100_000;
    for i in 0..n {
        let m = random_message(&mut rng);
        let bytes = m.encode().map_err(|e| format!("message {i}: encode failed: {e}"))?;
        check(bytes.len() == m.encoded_size(), || {
            format!("message {i}: {} bytes, encoded_size {}", bytes.len(), m.encoded_size())
        })?;
        let back = Message::decode(&bytes).map_err(|e| format!("message {i}: decode failed: {e}"))?;
        check(back == m, || format!("message {i}: round trip changed the message"))?;

        // Mutations of a valid packet, then pure noise: decode must not panic.
        let mut fuzz = bytes.clone();
        for _ in 0..rng.random_range(1..4) {
            let k = rng.random_range(0..fuzz.len());
            fuzz[k] = rng.random();
        }
        fuzz.truncate(rng.random_range(0..=fuzz.len()));
        let _ = Message::decode(&fuzz);
        let noise: Vec<u8> = (0..rng.random_range(0..64)).map(|_| rng.random()).collect();
        let _ = Message::decode(&noise);
    }
    let elapsed = started.elapsed();
    check(elapsed.as_secs() < 30, || format!("took {elapsed:?}"))?;
    Ok(format!("{n} round trips, {} fuzzed inputs ({elapsed:.1?})", 2 * n))
}

fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let mut present = HashSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u, v));
        present.insert((u, v));
    }
    for _ in 0..rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let (u, v) = (a.min(b), a.max(b));
        if u != v && present.insert((u, v)) {
            edges.push((u, v));
        }
    }
    edges
}

fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn criterion_9() -> Outcome {
    let mut rng = rng_stream(9, "acceptance.advertise");
    let graphs = 100;
    let mut checked = 0usize;
    for g in 0..graphs {
        let n = rng.random_range(2..=20);
        let edges = random_connected_graph(&mut rng, n);
        let mut faces: Vec<WiredFaces> = vec![Vec::new(); n];
        let mut plain: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in &edges {
            let fu = FaceId(faces[u].len() as u16 + 1);
            let fv = FaceId(faces[v].len() as u16 + 1);
            faces[u].push((fu, Endpoint { node: NodeId(v as u32), face: fv }));
            faces[v].push((fv, Endpoint { node: NodeId(u as u32), face: fu }));
            plain[u].push(v);
            plain[v].push(u);
        }
        let servers: Vec<usize> = (0..rng.random_range(1..=3.min(n))).map(|_| rng.random_range(0..n)).collect();
        let origins: Vec<(NodeId, Prefix)> = servers
            .iter()
            .enumerate()
            .map(|(i, &s)| (NodeId(s as u32), Prefix::parse(&format!("ccnx:/s{i}")).expect("prefix")))
            .collect();
        let installed = advertise_prefixes(&faces, &origins);
        for (server, prefix) in &origins {
            let dist = bfs(&plain, server.0 as usize);
            for (node, routes) in installed.iter().enumerate() {
                let entry = routes.iter().find(|r| &r.prefix == prefix).ok_or_else(|| {
                    format!("graph {g}: node {node} has no route to {prefix}")
                })?;
                check(entry.metric == dist[node], || {
                    format!("graph {g}: node {node} metric {} for {prefix}, BFS {}", entry.metric, dist[node])
                })?;
                if dist[node] > 0 {
                    // The chosen face leads one hop closer.
                    let next = faces[node]
                        .iter()
                        .find(|(f, _)| *f == entry.face)
                        .map(|(_, peer)| peer.node.0 as usize)
                        .ok_or_else(|| format!("graph {g}: route on unknown face"))?;
                    check(dist[next] + 1 == dist[node], || format!("graph {g}: node {node} routes away from {prefix}"))?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{graphs} random graphs, {checked} installed routes equal BFS distances"))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut ledger = Vec::new();
    let sweep = catalog_sweep(&mut ledger);
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "diversity monotonicity", criterion_1(&sweep)),
        (2, "warm-up shape", criterion_2(&sweep)),
        (3, "deterministic replay", criterion_3(&mut ledger)),
        (4, "analytic latency oracle", criterion_4(&mut ledger)),
        (5, "forwarder oracle equivalence", criterion_5()),
        (6, "conservation", criterion_6(&ledger)),
        (7, "wireless retransmission", criterion_7()),
        (8, "codec round trip", criterion_8()),
        (9, "prefix advertisement", criterion_9()),
    ];
    let mut failed = 0;
    for (n, title, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n} ({title}): PASS: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({title}): FAIL: {why}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed in {:.1?}", results.len() - failed, results.len(), started.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
