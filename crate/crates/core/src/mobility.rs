//! Node positions: static placement and random waypoint motion.
//!
//! Positions are evaluated in closed form from the current leg, so querying
//! at any time (in non-decreasing order) is exact and cheap.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Rectangle `[0, width] x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Arena {
    pub fn contains(&self, p: &Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    fn clamp(&self, p: Position) -> Position {
        Position {
            x: p.x.clamp(0.0, self.width),
            y: p.y.clamp(0.0, self.height),
        }
    }

    pub fn center(&self) -> Position {
        Position::new(self.width / 2.0, self.height / 2.0)
    }

    pub fn random_point(&self, rng: &mut impl Rng) -> Position {
        Position::new(
            rng.random_range(0.0..=self.width),
            rng.random_range(0.0..=self.height),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointParams {
    /// m/s, must be > 0.
    pub speed_min: f64,
    pub speed_max: f64,
    /// Seconds.
    pub pause_min: f64,
    pub pause_max: f64,
}

impl Default for WaypointParams {
    fn default() -> Self {
        WaypointParams {
            speed_min: 1.0,
            speed_max: 2.0,
            pause_min: 0.0,
            pause_max: 60.0,
        }
    }
}

/// One leg of motion followed by a pause at `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointState {
    pub origin: Position,
    pub target: Position,
    pub speed: f64,
    pub leg_start: SimTime,
    pub arrive_at: SimTime,
    pub pause_until: SimTime,
}

impl WaypointState {
    /// A state that is already "done" at `at`, resting at `p`.
    pub fn resting(p: Position, at: SimTime) -> Self {
        WaypointState {
            origin: p,
            target: p,
            speed: 0.0,
            leg_start: at,
            arrive_at: at,
            pause_until: at,
        }
    }

    pub fn position_at(&self, t: SimTime) -> Position {
        if t >= self.arrive_at || self.speed == 0.0 {
            return self.target;
        }
        let dist = self.origin.distance(&self.target);
        if dist == 0.0 {
            return self.target;
        }
        let elapsed = t.saturating_sub(self.leg_start).as_secs_f64();
        let frac = (elapsed * self.speed / dist).min(1.0);
        Position {
            x: self.origin.x + (self.target.x - self.origin.x) * frac,
            y: self.origin.y + (self.target.y - self.origin.y) * frac,
        }
    }
}

/// Draws the next leg starting where `state` left off, at its `pause_until`.
pub fn waypoint_step(
    state: &WaypointState,
    arena: &Arena,
    params: &WaypointParams,
    rng: &mut impl Rng,
) -> WaypointState {
    let origin = state.target;
    let target = arena.random_point(rng);
    let speed = if params.speed_max > params.speed_min {
        rng.random_range(params.speed_min..=params.speed_max)
    } else {
        params.speed_min
    };
    let pause = if params.pause_max > params.pause_min {
        rng.random_range(params.pause_min..=params.pause_max)
    } else {
        params.pause_min
    };
    let leg_start = state.pause_until;
    let arrive_at = leg_start + SimTime::from_secs_f64(origin.distance(&target) / speed);
    WaypointState {
        origin,
        target,
        speed,
        leg_start,
        arrive_at,
        pause_until: arrive_at + SimTime::from_secs_f64(pause),
    }
}

#[derive(Debug, Clone)]
pub struct RandomWaypoint {
    arena: Arena,
    params: WaypointParams,
    state: WaypointState,
    rng: ChaCha8Rng,
    legs: u64,
}

impl RandomWaypoint {
    /// Starts at `start`, with the first leg beginning at t = 0.
    pub fn new(arena: Arena, params: WaypointParams, start: Position, mut rng: ChaCha8Rng) -> Self {
        let state = waypoint_step(
            &WaypointState::resting(start, SimTime::ZERO),
            &arena,
            &params,
            &mut rng,
        );
        RandomWaypoint {
            arena,
            params,
            state,
            rng,
            legs: 1,
        }
    }

    pub fn state(&self) -> &WaypointState {
        &self.state
    }

    pub fn legs(&self) -> u64 {
        self.legs
    }

    /// Position at `t`. Calls must come with non-decreasing `t`.
    pub fn position_at(&mut self, t: SimTime) -> Position {
        while t > self.state.pause_until {
            self.state = waypoint_step(&self.state, &self.arena, &self.params, &mut self.rng);
            self.legs += 1;
        }
        self.arena.clamp(self.state.position_at(t))
    }
}

#[derive(Debug, Clone)]
pub enum Mobility {
    Static(Position),
    RandomWaypoint(Box<RandomWaypoint>),
}

impl Mobility {
    pub fn position_at(&mut self, t: SimTime) -> Position {
        match self {
            Mobility::Static(p) => *p,
            Mobility::RandomWaypoint(rw) => rw.position_at(t),
        }
    }

    pub fn is_mobile(&self) -> bool {
        matches!(self, Mobility::RandomWaypoint(_))
    }
}
