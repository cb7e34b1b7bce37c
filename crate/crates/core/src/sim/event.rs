use std::cmp::Ordering;

use crate::model::Class;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    ServiceCompletion,
    SwitchoverCompletion,
    Arrival(Class),
}

impl EventKind {
    /// Processing order among simultaneous events.
    pub fn rank(self) -> u8 {
        match self {
            EventKind::ServiceCompletion => 0,
            EventKind::SwitchoverCompletion => 1,
            EventKind::Arrival(_) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub seq: u64,
}

impl Event {
    fn key(&self) -> (f64, u8, u64) {
        (self.time, self.kind.rank(), self.seq)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reversed so that `BinaryHeap` pops the earliest event first.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)).then(b.2.cmp(&a.2))
    }
}

/// One line of the optional event log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: LoggedKind,
    pub queue: usize,
    pub class: Option<Class>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoggedKind {
    Arrival,
    ServiceStart,
    ServiceCompletion,
    VisitBegin,
    VisitEnd,
    SwitchoverCompletion,
}

impl EventRecord {
    /// Line-delimited form: `time,kind,queue,class`.
    pub fn to_line(&self) -> String {
        let class = self.class.map(|c| c.label()).unwrap_or("-");
        format!("{},{:?},Q{},{}", self.time, self.kind, self.queue + 1, class)
    }
}
