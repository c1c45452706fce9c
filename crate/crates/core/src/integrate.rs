//! Fixed-step RK4 integration of a single branch and detection of
//! state-triggered events (arrival at a target point, section crossings).

use crate::error::{Error, Result};
use crate::geom::{Point, Vec2};
use crate::inclusion::{BranchField, BranchLabel, Tolerances};

/// Abort integration once the state norm exceeds this; branches without
/// bounded solutions leave every compact region.
pub const BLOW_UP_LIMIT: f64 = 1e6;

/// A one-branch piece of a solution, densely sampled in time.
#[derive(Debug, Clone)]
pub struct Segment {
    pub branch: BranchLabel,
    /// (t, state) with strictly increasing t, covering [t_start, t_end].
    pub samples: Vec<(f64, Point)>,
    pub t_start: f64,
    pub t_end: f64,
}

impl Segment {
    pub fn start_point(&self) -> Point {
        self.samples.first().expect("segment has samples").1
    }

    pub fn end_point(&self) -> Point {
        self.samples.last().expect("segment has samples").1
    }

    /// Linear interpolation between samples.
    pub fn eval(&self, t: f64) -> Result<Point> {
        if t < self.t_start - 1e-12 || t > self.t_end + 1e-12 {
            return Err(Error::OutsideWindow {
                t,
                lo: self.t_start,
                hi: self.t_end,
            });
        }
        let idx = self
            .samples
            .partition_point(|&(st, _)| st < t)
            .min(self.samples.len() - 1);
        if idx == 0 {
            return Ok(self.samples[0].1);
        }
        let (t0, p0) = self.samples[idx - 1];
        let (t1, p1) = self.samples[idx];
        if t1 <= t0 {
            return Ok(p1);
        }
        Ok(p0.lerp(p1, ((t - t0) / (t1 - t0)).clamp(0.0, 1.0)))
    }

    /// Shift all sample times by dt (relabels the clock, same curve).
    pub fn shifted(&self, dt: f64) -> Segment {
        Segment {
            branch: self.branch,
            samples: self.samples.iter().map(|&(t, p)| (t + dt, p)).collect(),
            t_start: self.t_start + dt,
            t_end: self.t_end + dt,
        }
    }
}

/// One classical RK4 step (also used by refinement loops elsewhere).
pub(crate) fn rk4_probe(field: &BranchField, x: Point, h: f64) -> Point {
    rk4_step(field, x, h)
}

fn rk4_step(field: &BranchField, x: Point, h: f64) -> Point {
    let k1 = field.eval(x);
    let k2 = field.eval(x + k1 * (h / 2.0));
    let k3 = field.eval(x + k2 * (h / 2.0));
    let k4 = field.eval(x + k3 * h);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Integrate ẋ = f(x) from (t0, x0) to t1 with the classical 4th-order
/// scheme at the fixed step `tol.integ_step`; a final partial step lands
/// exactly on t1.
pub fn integrate_branch(
    field: &BranchField,
    x0: Point,
    t0: f64,
    t1: f64,
    tol: &Tolerances,
) -> Result<Segment> {
    if !(t0 < t1) {
        return Err(Error::Parameter(format!(
            "integration window must have t0 < t1, got [{t0}, {t1}]"
        )));
    }
    if !x0.is_finite() {
        return Err(Error::Parameter("non-finite initial state".into()));
    }
    let h = tol.integ_step;
    let span = t1 - t0;
    let n = (span / h).floor() as usize;
    let mut samples = Vec::with_capacity(n + 2);
    samples.push((t0, x0));
    let mut x = x0;
    let mut t = t0;
    for _ in 0..n {
        x = rk4_step(field, x, h);
        t += h;
        if !x.is_finite() || x.norm() > BLOW_UP_LIMIT {
            let (lt, lp) = *samples.last().unwrap();
            return Err(Error::BlowUp { t: lt, last: lp });
        }
        samples.push((t, x));
    }
    if t1 - t > 1e-12 * span.max(1.0) {
        x = rk4_step(field, x, t1 - t);
        if !x.is_finite() || x.norm() > BLOW_UP_LIMIT {
            let (lt, lp) = *samples.last().unwrap();
            return Err(Error::BlowUp { t: lt, last: lp });
        }
        samples.push((t1, x));
    } else {
        samples.last_mut().unwrap().0 = t1;
    }
    Ok(Segment {
        branch: field.label,
        samples,
        t_start: t0,
        t_end: t1,
    })
}

/// Which way a trajectory must cross a section for the event to fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    PosToNeg,
    NegToPos,
    Any,
}

/// A state-triggered event.
#[derive(Debug, Clone, Copy)]
pub enum EventSpec {
    /// Arrival within `event_tol` of a target point.
    Point { target: Point },
    /// Signed crossing of the line through `origin` with the given normal.
    Section {
        origin: Point,
        normal: Vec2,
        crossing: Crossing,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct EventHit {
    pub t: f64,
    pub p: Point,
}

/// Dense re-evaluation from an anchor state, for refinement inside one
/// integration step.
fn eval_from(field: &BranchField, x_a: Point, dt: f64, h: f64) -> Point {
    if dt <= 0.0 {
        return x_a;
    }
    let n = (dt / h).floor() as usize;
    let mut x = x_a;
    for _ in 0..n {
        x = rk4_step(field, x, h);
    }
    let rem = dt - n as f64 * h;
    if rem > 1e-15 {
        x = rk4_step(field, x, rem);
    }
    x
}

/// Earliest event time in (0, t_max]. The trajectory is stepped at
/// `integ_step`; brackets are refined by bisection (sections) or ternary
/// search plus bisection (closest approach to a point target).
pub fn hit_event(
    field: &BranchField,
    x0: Point,
    event: &EventSpec,
    t_max: f64,
    tol: &Tolerances,
) -> Result<EventHit> {
    if !(t_max > 0.0) {
        return Err(Error::Parameter("t_max must be positive".into()));
    }
    let h = tol.integ_step;
    match *event {
        EventSpec::Point { target } => hit_point(field, x0, target, t_max, h, tol.event_tol),
        EventSpec::Section {
            origin,
            normal,
            crossing,
        } => hit_section(field, x0, origin, normal, crossing, t_max, h, tol.event_tol),
    }
}

fn hit_point(
    field: &BranchField,
    x0: Point,
    target: Point,
    t_max: f64,
    h: f64,
    event_tol: f64,
) -> Result<EventHit> {
    // Arm only once the state has left the target neighbourhood, so cycles
    // through the start point report the return, not t = 0.
    let mut armed = x0.dist(target) > 2.0 * event_tol;
    let mut closest = x0.dist(target);

    let mut t_prev = 0.0;
    let mut x_prev = x0;
    let mut d_prev = x0.dist(target);
    let mut t = 0.0;
    let mut x = x0;
    loop {
        let step = h.min(t_max - t);
        if step <= 1e-15 {
            // monotone approach ending inside the ball at the horizon
            if armed && x.dist(target) <= event_tol {
                return Ok(EventHit { t, p: x });
            }
            return Err(Error::NoEvent { t_max, closest });
        }
        let x_next = rk4_step(field, x, step);
        let t_next = t + step;
        if !x_next.is_finite() || x_next.norm() > BLOW_UP_LIMIT {
            return Err(Error::BlowUp { t, last: x });
        }
        let d = x.dist(target);
        let d_next = x_next.dist(target);
        closest = closest.min(d_next);
        if !armed && d_next > 2.0 * event_tol {
            armed = true;
        }
        // closest approach inside [t_prev, t_next]: d decreased then rose
        if armed && t > 0.0 && d_prev >= d && d_next > d {
            if let Some(hit) = refine_minimum(field, x_prev, t_prev, t_next, target, event_tol, h)
            {
                return Ok(hit);
            }
        }
        t_prev = t;
        x_prev = x;
        d_prev = d;
        t = t_next;
        x = x_next;
    }
}

/// Ternary-search the distance minimum inside [t_lo, t_hi]; the event time
/// is the closest approach, accepted when it enters the tolerance ball.
fn refine_minimum(
    field: &BranchField,
    x_lo: Point,
    t_lo: f64,
    t_hi: f64,
    target: Point,
    event_tol: f64,
    h: f64,
) -> Option<EventHit> {
    let d_at = |t: f64| eval_from(field, x_lo, t - t_lo, h).dist(target);
    let (mut lo, mut hi) = (t_lo, t_hi);
    for _ in 0..80 {
        if hi - lo < 1e-13 {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if d_at(m1) <= d_at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t_min = 0.5 * (lo + hi);
    if d_at(t_min) <= event_tol {
        let p = eval_from(field, x_lo, t_min - t_lo, h);
        Some(EventHit { t: t_min, p })
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn hit_section(
    field: &BranchField,
    x0: Point,
    origin: Point,
    normal: Vec2,
    crossing: Crossing,
    t_max: f64,
    h: f64,
    event_tol: f64,
) -> Result<EventHit> {
    let s_of = |p: Point| (p - origin).dot(normal);
    let mut armed = s_of(x0).abs() > event_tol;
    let mut closest = s_of(x0).abs();

    let mut t = 0.0;
    let mut x = x0;
    loop {
        let step = h.min(t_max - t);
        if step <= 1e-15 {
            return Err(Error::NoEvent { t_max, closest });
        }
        let x_next = rk4_step(field, x, step);
        let t_next = t + step;
        if !x_next.is_finite() || x_next.norm() > BLOW_UP_LIMIT {
            return Err(Error::BlowUp { t, last: x });
        }
        let (s0, s1) = (s_of(x), s_of(x_next));
        closest = closest.min(s1.abs());
        if !armed && s1.abs() > event_tol {
            armed = true;
        }
        if armed {
            let fires = match crossing {
                Crossing::PosToNeg => s0 > 0.0 && s1 <= 0.0,
                Crossing::NegToPos => s0 < 0.0 && s1 >= 0.0,
                Crossing::Any => (s0 > 0.0 && s1 <= 0.0) || (s0 < 0.0 && s1 >= 0.0),
            };
            if fires {
                let (mut lo, mut hi) = (t, t_next);
                for _ in 0..60 {
                    if hi - lo < 1e-14 {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    let sm = s_of(eval_from(field, x, mid - t, h));
                    if (s0 > 0.0) == (sm > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_hit = 0.5 * (lo + hi);
                let p = eval_from(field, x, t_hit - t, h);
                return Ok(EventHit { t: t_hit, p });
            }
        }
        t = t_next;
        x = x_next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusion::BranchLabel::*;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn zero_field_stays_put() {
        let f = BranchField::constant(Branch1, Vec2::new(0.0, 0.0));
        let seg = integrate_branch(&f, Point::new(3.0, 4.0), 0.0, 1.0, &tols()).unwrap();
        assert_eq!(seg.start_point(), Point::new(3.0, 4.0));
        assert!(seg.end_point().dist(Point::new(3.0, 4.0)) < 1e-12);
    }

    #[test]
    fn constant_field_is_exact() {
        let f = BranchField::constant(Branch1, Vec2::new(1.0, 0.0));
        let seg = integrate_branch(&f, Point::new(0.0, 0.0), 0.0, 1.0, &tols()).unwrap();
        assert!(seg.end_point().dist(Point::new(1.0, 0.0)) <= 1e-9);
        assert!((seg.t_end - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_sink_matches_closed_form() {
        let f = BranchField::linear(Branch1, [[-1.0, 0.0], [0.0, -1.0]]);
        let seg = integrate_branch(&f, Point::new(1.0, 0.0), 0.0, 1.0, &tols()).unwrap();
        let expect = Point::new((-1.0f64).exp(), 0.0);
        assert!(seg.end_point().dist(expect) <= 1e-8);
    }

    #[test]
    fn order_four_convergence_on_linear_sink() {
        let f = BranchField::linear(Branch1, [[-1.0, 0.0], [0.0, -1.0]]);
        let exact = Point::new((-1.0f64).exp(), 0.0);
        let err = |h: f64| {
            let t = Tolerances {
                integ_step: h,
                ..Tolerances::default()
            };
            integrate_branch(&f, Point::new(1.0, 0.0), 0.0, 1.0, &t)
                .unwrap()
                .end_point()
                .dist(exact)
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(
            e1 / e2 >= 8.0,
            "convergence factor {} (errors {e1:.3e}, {e2:.3e})",
            e1 / e2
        );
    }

    #[test]
    fn local_consistency_of_samples() {
        let f = BranchField::linear(Branch1, [[-0.1, -1.0], [1.0, -0.1]]);
        let seg = integrate_branch(&f, Point::new(1.0, 0.0), 0.0, 2.0, &tols()).unwrap();
        let h = tols().integ_step;
        let mut worst: f64 = 0.0;
        for w in seg.samples.windows(2) {
            let (t0, p0) = w[0];
            let (t1, p1) = w[1];
            let dt = t1 - t0;
            let predicted = p0 + f.eval(p0) * dt;
            worst = worst.max(p1.dist(predicted) / (dt * dt).max(1e-30));
        }
        // |p_{k+1} − p_k − f(p_k)·Δt| ≤ C·Δt² with a modest constant
        assert!(worst < 10.0, "consistency constant {worst} at step {h}");
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let f = BranchField::linear(Branch1, [[-0.1, -1.0], [1.0, -0.1]]);
        let g = BranchField::new(Branch1, {
            let f = f.clone();
            move |p| -f.eval(p)
        });
        let x0 = Point::new(1.0, 0.5);
        let fwd = integrate_branch(&f, x0, 0.0, 3.0, &tols()).unwrap();
        let back = integrate_branch(&g, fwd.end_point(), 0.0, 3.0, &tols()).unwrap();
        assert!(back.end_point().dist(x0) <= 1e-6);
    }

    #[test]
    fn blow_up_reports_last_state() {
        let f = BranchField::new(Branch2, |p: Point| Vec2::new(p.x1 * p.x1, 0.0));
        let res = integrate_branch(&f, Point::new(2.0, 0.0), 0.0, 10.0, &tols());
        assert!(matches!(res, Err(Error::BlowUp { .. })));
    }

    #[test]
    fn unit_speed_hits_unit_distance() {
        let f = BranchField::constant(Branch1, Vec2::new(1.0, 0.0));
        let hit = hit_event(
            &f,
            Point::new(0.0, 0.0),
            &EventSpec::Point {
                target: Point::new(1.0, 0.0),
            },
            2.0,
            &tols(),
        )
        .unwrap();
        assert!((hit.t - 1.0).abs() <= 1e-6, "t_hit {}", hit.t);
    }

    #[test]
    fn sink_hit_time_is_ln_four() {
        let f = BranchField::linear(Branch1, [[-1.0, 0.0], [0.0, -1.0]]);
        let hit = hit_event(
            &f,
            Point::new(2.0, 0.0),
            &EventSpec::Point {
                target: Point::new(0.5, 0.0),
            },
            5.0,
            &tols(),
        )
        .unwrap();
        assert!((hit.t - 4.0f64.ln()).abs() <= 1e-6, "t_hit {}", hit.t);
    }

    #[test]
    fn half_revolution_section_crossing() {
        // rotation (x2, −x1) from (−1, 0): crosses the x1-axis from above at π
        let f = BranchField::new(Branch1, |p: Point| Vec2::new(p.x2, -p.x1));
        let hit = hit_event(
            &f,
            Point::new(-1.0, 0.0),
            &EventSpec::Section {
                origin: Point::new(0.0, 0.0),
                normal: Vec2::new(0.0, 1.0),
                crossing: Crossing::PosToNeg,
            },
            10.0,
            &tols(),
        )
        .unwrap();
        assert!((hit.t - std::f64::consts::PI).abs() <= 1e-5, "t_hit {}", hit.t);
    }

    #[test]
    fn hit_point_reintegrates_within_tolerance() {
        let f = BranchField::linear(Branch1, [[-0.1, -1.0], [1.0, -0.1]]);
        let target = Point::new(0.0, 0.8);
        let x0 = Point::new(1.0, 0.0);
        let hit = hit_event(&f, x0, &EventSpec::Point { target }, 10.0, &tols());
        if let Ok(hit) = hit {
            let seg = integrate_branch(&f, x0, 0.0, hit.t, &tols()).unwrap();
            assert!(seg.end_point().dist(target) <= 2.0 * tols().event_tol);
        }
    }

    #[test]
    fn no_event_before_horizon() {
        let f = BranchField::constant(Branch1, Vec2::new(1.0, 0.0));
        let res = hit_event(
            &f,
            Point::new(0.0, 0.0),
            &EventSpec::Point {
                target: Point::new(5.0, 0.0),
            },
            1.0,
            &tols(),
        );
        assert!(matches!(res, Err(Error::NoEvent { .. })));
    }
}
