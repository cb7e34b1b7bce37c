use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::event::{Event, EventKind, EventRecord, LoggedKind};
use crate::distribution::ServiceDistribution;
use crate::error::SimError;
use crate::model::{validate, Class, Queue, SystemConfig, Violation};

/// When a replication ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopRule {
    /// Number of service starts, warm-up included.
    pub served: u64,
    /// Optional cap on the number of visit beginnings, needed when the
    /// system may see no customers at all.
    pub max_visits: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    pub stop: StopRule,
    /// Fraction of `stop.served` whose statistics are discarded.
    pub warmup: f64,
    pub seed: u64,
    pub record_events: bool,
}

impl SimOptions {
    pub fn new(served: u64, warmup: f64, seed: u64) -> Self {
        SimOptions {
            stop: StopRule {
                served,
                max_visits: None,
            },
            warmup,
            seed,
            record_events: false,
        }
    }
}

/// Output of one replication. Waiting times are unscaled.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    /// Waiting times per class, in service-start order.
    pub waits: [Vec<f64>; 3],
    /// Times between successive visit beginnings, per queue.
    pub cycles: [Vec<f64>; 2],
    /// Time-average number in system (waiting or in service) per class.
    pub mean_in_system: [f64; 3],
    /// Average number of type-2 customers found by type-2 arrivals.
    pub arrival_seen_q2: Option<f64>,
    /// Visit beginnings per queue after warm-up.
    pub visits: [u64; 2],
    pub seed: u64,
    pub warmup_discarded: u64,
    pub served: u64,
    /// Length of the observation window after warm-up.
    pub observed_time: f64,
    pub events: Option<Vec<EventRecord>>,
}

impl SampleSet {
    pub fn waits(&self, class: Class) -> &[f64] {
        &self.waits[class.index()]
    }

    pub fn cycles(&self, queue: Queue) -> &[f64] {
        &self.cycles[queue.index()]
    }

    /// Waiting times multiplied by `factor`, for the limit-law comparisons.
    pub fn scaled_waits(&self, class: Class, factor: f64) -> Vec<f64> {
        self.waits(class).iter().map(|w| w * factor).collect()
    }

    /// Pools another replication into this one. Time averages are combined
    /// with the observation windows as weights.
    pub fn merge(&mut self, other: SampleSet) {
        let total = self.observed_time + other.observed_time;
        for i in 0..3 {
            self.mean_in_system[i] = if total > 0.0 {
                (self.mean_in_system[i] * self.observed_time + other.mean_in_system[i] * other.observed_time) / total
            } else {
                0.0
            };
        }
        let (n_a, n_b) = (self.waits[2].len() as f64, other.waits[2].len() as f64);
        self.arrival_seen_q2 = match (self.arrival_seen_q2, other.arrival_seen_q2) {
            (Some(a), Some(b)) if n_a + n_b > 0.0 => Some((a * n_a + b * n_b) / (n_a + n_b)),
            (a, b) => a.or(b),
        };
        for (mine, theirs) in self.waits.iter_mut().zip(other.waits) {
            mine.extend(theirs);
        }
        for (mine, theirs) in self.cycles.iter_mut().zip(other.cycles) {
            mine.extend(theirs);
        }
        self.visits[0] += other.visits[0];
        self.visits[1] += other.visits[1];
        self.warmup_discarded += other.warmup_discarded;
        self.served += other.served;
        self.observed_time = total;
        self.events = None;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Server {
    Serving(Queue, Class),
    Switching(Queue, Queue),
    /// Only with all switch-overs of length zero and an empty system.
    Idle,
}

/// Substream indices of the root seed.
const ARRIVAL_STREAM: [u64; 3] = [0, 1, 2];
const SERVICE_STREAM: [u64; 3] = [3, 4, 5];
const ROUTING_STREAM: u64 = 6;
const SWITCH_STREAM: [[u64; 2]; 2] = [[7, 8], [9, 10]];

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Engine<'a> {
    config: &'a SystemConfig,
    now: f64,
    seq: u64,
    calendar: BinaryHeap<Event>,
    server: Server,
    buffers: [VecDeque<f64>; 3],
    in_system: [u64; 3],
    arrival_rng: [ChaCha8Rng; 3],
    service_rng: [ChaCha8Rng; 3],
    routing_rng: ChaCha8Rng,
    switch_rng: [[ChaCha8Rng; 2]; 2],
    zero_switching: bool,

    target: u64,
    discard: u64,
    max_visits: Option<u64>,
    served: u64,
    total_visits: u64,
    warm_time: Option<f64>,
    last_visit_begin: [Option<f64>; 2],
    last_area_update: f64,
    area: [f64; 3],
    seen_q2_sum: f64,
    seen_q2_count: u64,

    waits: [Vec<f64>; 3],
    cycles: [Vec<f64>; 2],
    visits: [u64; 2],
    log: Option<Vec<EventRecord>>,
}

/// Runs one replication. Deterministic in `(config, opts)`.
pub fn run_simulation(config: &SystemConfig, opts: &SimOptions) -> Result<SampleSet, SimError> {
    let report = validate(config);
    for v in &report.violations {
        if let Violation::Unstable { rho } = v {
            return Err(SimError::Unstable { rho: *rho });
        }
    }
    if !report.is_valid() {
        return Err(SimError::Setup(report.to_string()));
    }
    if opts.stop.served == 0 {
        return Err(SimError::Setup("the served-customer target must be at least 1".into()));
    }
    if !(0.0..=0.9).contains(&opts.warmup) {
        return Err(SimError::Setup(format!(
            "warm-up fraction {} outside [0, 0.9]",
            opts.warmup
        )));
    }
    let no_arrivals = Class::ALL.iter().all(|&c| config.arrival_rate(c) == 0.0);
    if no_arrivals && opts.stop.max_visits.is_none() {
        return Err(SimError::Setup(
            "without arrivals the run needs a visit cap to terminate".into(),
        ));
    }
    let zero_switching = Queue::ALL
        .iter()
        .all(|&i| Queue::ALL.iter().all(|&j| config.switchover(i, j).is_zero()));
    if no_arrivals && zero_switching {
        return Err(SimError::Setup(
            "no arrivals and no switch-over time: simulated time cannot advance".into(),
        ));
    }

    let seed = opts.seed;
    let discard = (opts.warmup * opts.stop.served as f64).floor() as u64;
    let mut engine = Engine {
        config,
        now: 0.0,
        seq: 0,
        calendar: BinaryHeap::new(),
        server: Server::Idle,
        buffers: Default::default(),
        in_system: [0; 3],
        arrival_rng: ARRIVAL_STREAM.map(|i| stream(seed, i)),
        service_rng: SERVICE_STREAM.map(|i| stream(seed, i)),
        routing_rng: stream(seed, ROUTING_STREAM),
        switch_rng: SWITCH_STREAM.map(|row| row.map(|i| stream(seed, i))),
        zero_switching,
        target: opts.stop.served,
        discard,
        max_visits: opts.stop.max_visits,
        served: 0,
        total_visits: 0,
        warm_time: if discard == 0 { Some(0.0) } else { None },
        last_visit_begin: [None; 2],
        last_area_update: 0.0,
        area: [0.0; 3],
        seen_q2_sum: 0.0,
        seen_q2_count: 0,
        waits: Default::default(),
        cycles: Default::default(),
        visits: [0; 2],
        log: if opts.record_events { Some(Vec::new()) } else { None },
    };
    engine.run();
    Ok(engine.finish(seed))
}

impl Engine<'_> {
    fn schedule(&mut self, delay: f64, kind: EventKind) {
        self.seq += 1;
        self.calendar.push(Event {
            time: self.now + delay,
            kind,
            seq: self.seq,
        });
    }

    fn record(&mut self, kind: LoggedKind, queue: Queue, class: Option<Class>) {
        if let Some(log) = self.log.as_mut() {
            log.push(EventRecord {
                time: self.now,
                kind,
                queue: queue.index(),
                class,
            });
        }
    }

    fn schedule_arrival(&mut self, class: Class) {
        let rate = self.config.arrival_rate(class);
        if rate > 0.0 {
            let gap = ServiceDistribution::Exponential { rate }.sample(&mut self.arrival_rng[class.index()]);
            self.schedule(gap, EventKind::Arrival(class));
        }
    }

    fn advance(&mut self, to: f64) {
        if let Some(start) = self.warm_time {
            let from = self.last_area_update.max(start);
            if to > from {
                for i in 0..3 {
                    self.area[i] += self.in_system[i] as f64 * (to - from);
                }
            }
        }
        self.last_area_update = to;
        self.now = to;
    }

    fn run(&mut self) {
        for class in Class::ALL {
            self.schedule_arrival(class);
        }
        if self.begin_visit(Queue::Q1) {
            return;
        }
        while let Some(ev) = self.calendar.pop() {
            self.advance(ev.time);
            let done = match ev.kind {
                EventKind::Arrival(class) => self.on_arrival(class),
                EventKind::ServiceCompletion => self.on_service_completion(),
                EventKind::SwitchoverCompletion => match self.server {
                    Server::Switching(from, to) => {
                        self.record(LoggedKind::SwitchoverCompletion, from, None);
                        self.begin_visit(to)
                    }
                    other => unreachable!("switch-over completion while {other:?}"),
                },
            };
            if done {
                return;
            }
        }
    }

    fn on_arrival(&mut self, class: Class) -> bool {
        let i = class.index();
        if class == Class::Two && self.warm_time.is_some() {
            self.seen_q2_sum += self.in_system[i] as f64;
            self.seen_q2_count += 1;
        }
        self.buffers[i].push_back(self.now);
        self.in_system[i] += 1;
        self.record(LoggedKind::Arrival, class.queue(), Some(class));
        self.schedule_arrival(class);
        if self.server == Server::Idle {
            return self.begin_visit(class.queue());
        }
        false
    }

    fn queue_empty(&self, q: Queue) -> bool {
        match q {
            Queue::Q1 => self.buffers[0].is_empty() && self.buffers[1].is_empty(),
            Queue::Q2 => self.buffers[2].is_empty(),
        }
    }

    /// Each handler returns true once the stop rule is met.
    fn begin_visit(&mut self, q: Queue) -> bool {
        let qi = q.index();
        if let Some(warm) = self.warm_time {
            if let Some(prev) = self.last_visit_begin[qi] {
                if prev >= warm {
                    self.cycles[qi].push(self.now - prev);
                }
            }
            self.visits[qi] += 1;
        }
        self.last_visit_begin[qi] = Some(self.now);
        self.total_visits += 1;
        self.record(LoggedKind::VisitBegin, q, None);
        if self.max_visits.is_some_and(|cap| self.total_visits >= cap) {
            return true;
        }
        if self.queue_empty(q) {
            self.end_visit(q);
            false
        } else {
            self.start_service(q)
        }
    }

    fn start_service(&mut self, q: Queue) -> bool {
        let class = match q {
            Queue::Q1 if !self.buffers[0].is_empty() => Class::H,
            Queue::Q1 => Class::L,
            Queue::Q2 => Class::Two,
        };
        let ci = class.index();
        let arrived = self.buffers[ci].pop_front().expect("nonempty buffer");
        if self.served >= self.discard {
            self.waits[ci].push(self.now - arrived);
        }
        self.served += 1;
        if self.served == self.discard {
            self.warm_time = Some(self.now);
        }
        self.server = Server::Serving(q, class);
        self.record(LoggedKind::ServiceStart, q, Some(class));
        if self.served >= self.target {
            return true;
        }
        let duration = self.config.service(class).sample(&mut self.service_rng[ci]);
        self.schedule(duration, EventKind::ServiceCompletion);
        false
    }

    fn on_service_completion(&mut self) -> bool {
        let Server::Serving(q, class) = self.server else {
            unreachable!("service completion without a service in progress");
        };
        self.in_system[class.index()] -= 1;
        self.record(LoggedKind::ServiceCompletion, q, Some(class));
        if self.queue_empty(q) {
            self.end_visit(q);
            false
        } else {
            self.start_service(q)
        }
    }

    fn end_visit(&mut self, q: Queue) {
        assert!(self.queue_empty(q), "visit ended at a nonempty queue");
        self.record(LoggedKind::VisitEnd, q, None);
        if self.zero_switching && self.in_system.iter().all(|&n| n == 0) {
            self.server = Server::Idle;
            return;
        }
        let stay = self.routing_rng.random::<f64>() < self.config.repeat_probability(q);
        let next = if stay { q } else { q.other() };
        let duration = self
            .config
            .switchover(q, next)
            .sample(&mut self.switch_rng[q.index()][next.index()]);
        self.server = Server::Switching(q, next);
        self.schedule(duration, EventKind::SwitchoverCompletion);
    }

    fn finish(self, seed: u64) -> SampleSet {
        let warm = self.warm_time.unwrap_or(self.now);
        let observed = self.now - warm;
        let mean_in_system = self.area.map(|a| if observed > 0.0 { a / observed } else { 0.0 });
        SampleSet {
            waits: self.waits,
            cycles: self.cycles,
            mean_in_system,
            arrival_seen_q2: (self.seen_q2_count > 0).then(|| self.seen_q2_sum / self.seen_q2_count as f64),
            visits: self.visits,
            seed,
            warmup_discarded: self.discard.min(self.served),
            served: self.served,
            observed_time: observed,
            events: self.log,
        }
    }
}
