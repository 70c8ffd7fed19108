use super::WarpedEvent;
use crate::event::Event;

/// Constant image velocity: `x' = x − (t − t_ref) v`.
#[inline]
pub fn warp_flow(e: &Event, t_ref: f64, v: [f64; 2]) -> WarpedEvent {
    let dt = e.t - t_ref;
    WarpedEvent { point: [e.x - dt * v[0], e.y - dt * v[1]], jacobian: Some([[-dt, 0.0], [0.0, -dt], [0.0, 0.0]]), valid: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Polarity;

    #[test]
    fn substitution_example() {
        let e = Event::new(1.0, 10.0, 10.0, Polarity::Positive);
        let w = warp_flow(&e, 0.5, [-40.0, 0.0]);
        assert_eq!(w.point, [30.0, 10.0]);
        let j = w.jacobian.unwrap();
        assert_eq!([j[0], j[1]], [[-0.5, 0.0], [0.0, -0.5]]);
    }

    #[test]
    fn zero_velocity_is_identity() {
        let e = Event::new(0.3, 4.0, 9.0, Polarity::Negative);
        assert_eq!(warp_flow(&e, 0.0, [0.0, 0.0]).point, [4.0, 9.0]);
    }
}
