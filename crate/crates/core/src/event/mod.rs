//! Events, processing windows, calibration and ground-truth poses.

mod camera;
mod io;
mod pose;

pub use camera::CameraGeometry;
pub use io::{
    load_calibration, load_events, load_poses, parse_events, save_calibration, save_events, save_poses, write_calibration, write_events, write_poses,
    LoadedEvents,
};
pub use pose::{angular_velocity_from_poses, PoseSample, PoseTrack, Quaternion};

/// Sign of the brightness change that triggered an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    /// Dataset encoding: `1` is positive, `0` is negative.
    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Polarity::Negative),
            1 => Some(Polarity::Positive),
            _ => None,
        }
    }

    pub fn to_bit(self) -> u8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => 0,
        }
    }

    /// `+1` or `-1`.
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }
}

/// One asynchronous brightness-change sample.
///
/// Coordinates are pixel positions. Sensor data is integral; synthetic
/// streams may carry sub-pixel positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub polarity: Polarity,
}

impl Event {
    pub fn new(t: f64, x: f64, y: f64, polarity: Polarity) -> Self {
        Self { t, x, y, polarity }
    }
}

/// Which instant of a window the events are warped to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefTime {
    First,
    #[default]
    Mid,
    Last,
}

/// A time-ordered group of events processed together.
#[derive(Debug, Clone, PartialEq)]
pub struct EventWindow {
    pub events: Vec<Event>,
    pub t_ref: f64,
}

impl EventWindow {
    /// Build a window with the reference time chosen from the event span.
    /// An empty window gets `t_ref = 0`.
    pub fn new(events: Vec<Event>, ref_time: RefTime) -> Self {
        let t_ref = match (events.first(), events.last()) {
            (Some(a), Some(b)) => match ref_time {
                RefTime::First => a.t,
                RefTime::Mid => 0.5 * (a.t + b.t),
                RefTime::Last => b.t,
            },
            _ => 0.0,
        };
        Self { events, t_ref }
    }

    pub fn with_t_ref(events: Vec<Event>, t_ref: f64) -> Self {
        Self { events, t_ref }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `(first.t, last.t)`, or `None` when empty.
    pub fn time_span(&self) -> Option<(f64, f64)> {
        Some((self.events.first()?.t, self.events.last()?.t))
    }

    pub fn mid_time(&self) -> Option<f64> {
        self.time_span().map(|(a, b)| 0.5 * (a + b))
    }
}

/// Split a stream into windows of exactly `n` consecutive events whose
/// start indices advance by `stride`. A trailing partial window is dropped.
///
/// # Panics
/// If `n` or `stride` is zero.
pub fn slice_by_count(events: &[Event], n: usize, stride: usize, ref_time: RefTime) -> Vec<EventWindow> {
    assert!(n >= 1 && stride >= 1, "window size and stride must be positive");
    let mut out = Vec::new();
    let mut start = 0;
    while start + n <= events.len() {
        out.push(EventWindow::new(events[start..start + n].to_vec(), ref_time));
        start += stride;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(n: usize) -> Vec<Event> {
        (0..n).map(|i| Event::new(i as f64 * 0.001, i as f64, 0.0, Polarity::Positive)).collect()
    }

    #[test]
    fn slicing_counts() {
        let ev = stream(10);
        let w = slice_by_count(&ev, 4, 4, RefTime::Mid);
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].events[0].x, 0.0);
        assert_eq!(w[1].events[3].x, 7.0);
        assert_eq!(slice_by_count(&ev, 4, 2, RefTime::Mid).len(), 4);
        assert!(slice_by_count(&stream(3), 4, 4, RefTime::Mid).is_empty());
    }

    #[test]
    fn reference_time_choices() {
        let ev = stream(5);
        assert_eq!(EventWindow::new(ev.clone(), RefTime::First).t_ref, 0.0);
        assert!((EventWindow::new(ev.clone(), RefTime::Mid).t_ref - 0.002).abs() < 1e-15);
        assert_eq!(EventWindow::new(ev, RefTime::Last).t_ref, 0.004);
        assert_eq!(EventWindow::new(vec![], RefTime::Mid).t_ref, 0.0);
    }

    #[test]
    fn polarity_encoding() {
        assert_eq!(Polarity::from_bit(0), Some(Polarity::Negative));
        assert_eq!(Polarity::from_bit(1).unwrap().sign(), 1.0);
        assert_eq!(Polarity::from_bit(2), None);
    }

    proptest::proptest! {
        #[test]
        fn non_overlapping_windows_partition_prefix(len in 0usize..200, n in 1usize..20) {
            let ev = stream(len);
            let w = slice_by_count(&ev, n, n, RefTime::Mid);
            proptest::prop_assert_eq!(w.len(), len / n);
            let flat: Vec<f64> = w.iter().flat_map(|w| w.events.iter().map(|e| e.x)).collect();
            let expect: Vec<f64> = ev[..(len / n) * n].iter().map(|e| e.x).collect();
            proptest::prop_assert_eq!(flat, expect);
        }
    }
}
