//! Shipped model instances: the bounce-on-a-segment system, the lens cycle,
//! the two fixed-point desk instances, loop-itinerary ensembles over the
//! spiral, and the IS-LM/QY-ML business-cycle inclusion.

use crate::error::{Error, Result};
use crate::geom::{Arc, Point, Region, Vec2};
use crate::inclusion::{BranchField, BranchLabel, Inclusion, Tolerances};
use crate::integrate::{integrate_branch, EventSpec, Segment};
use crate::solution::{
    build_from_events, BranchRule, Ensemble, EventRule, Provenance, SolutionWindow, TimeWindow,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

pub const C1: Point = Point::new(0.0, 0.0);
pub const C2: Point = Point::new(1.0, 0.0);
pub const C0: Point = Point::new(0.5, 0.0);

/// Default half-window for shipped ensembles.
pub const T_WIN: f64 = 40.0;

#[derive(Debug, Clone)]
pub struct CounterexampleU {
    pub inc: Inclusion,
    pub u: Region,
    pub u0: Region,
    /// Cycle solutions through the whole segment; x_{c1} first, x_{c2} second.
    pub x: Ensemble,
    /// Cycle solutions through the half segment [c0, c2].
    pub x0: Ensemble,
    /// X ∪ X0.
    pub rhat: Ensemble,
    /// X alone.
    pub rbar: Ensemble,
}

fn u_inclusion() -> Inclusion {
    Inclusion::new(
        BranchField::constant(BranchLabel::Branch1, Vec2::new(1.0, 0.0)),
        BranchField::constant(BranchLabel::Branch2, Vec2::new(-1.0, 0.0)),
    )
    .expect("distinct labels")
}

fn bounce_rule(left: Point, right: Point) -> EventRule {
    EventRule {
        branch1: Some(BranchRule {
            event: EventSpec::Point { target: right },
            next: BranchLabel::Branch2,
        }),
        branch2: Some(BranchRule {
            event: EventSpec::Point { target: left },
            next: BranchLabel::Branch1,
        }),
    }
}

/// Bounce solution on [left, right] at the given cycle phase. Phase 0 sits
/// at `left` about to move right; the period is 2·(right−left) at unit speed.
fn bounce_member(
    inc: &Inclusion,
    left: Point,
    right: Point,
    phase: f64,
    half_window: f64,
    tol: &Tolerances,
) -> Result<SolutionWindow> {
    let len = right.x1 - left.x1;
    let tau = 2.0 * len;
    let r = phase.rem_euclid(tau);
    let (x0, initial) = if r < len {
        (Point::new(left.x1 + r, 0.0), BranchLabel::Branch1)
    } else {
        (Point::new(left.x1 + (tau - r), 0.0), BranchLabel::Branch2)
    };
    build_from_events(
        inc,
        x0,
        initial,
        &bounce_rule(left, right),
        TimeWindow::symmetric(half_window)?,
        2.0 * tau,
        tol,
    )
}

fn bounce_ensemble(
    name: &str,
    inc: &Inclusion,
    left: Point,
    right: Point,
    phases: usize,
    tol: &Tolerances,
) -> Result<Ensemble> {
    let tau = 2.0 * (right.x1 - left.x1);
    let mut members = Vec::new();
    // the two corner solutions first, then evenly offset interior phases
    members.push(bounce_member(inc, left, right, 0.0, T_WIN, tol)?);
    members.push(bounce_member(inc, left, right, tau / 2.0, T_WIN, tol)?);
    for k in 0..phases {
        let phase = tau * (k as f64 + 0.5) / phases as f64;
        members.push(bounce_member(inc, left, right, phase, T_WIN, tol)?);
    }
    Ensemble::new(name, members)
}

/// The segment counterexample: both branches run along the unit segment
/// with opposite unit speeds, and every ensemble member bounces forever.
pub fn make_counterexample_u(tol: &Tolerances) -> Result<CounterexampleU> {
    make_counterexample_u_with_phases(16, tol)
}

/// Same construction at a chosen phase-sampling density (the refinement
/// ladder for the ω-chaos proxy; corner members keep their indices).
pub fn make_counterexample_u_with_phases(
    phases: usize,
    tol: &Tolerances,
) -> Result<CounterexampleU> {
    let inc = u_inclusion();
    let u = Region::segment_chain(vec![C1, C2], tol.event_tol)?;
    let u0 = Region::segment_chain(vec![C0, C2], tol.event_tol)?;
    let x = bounce_ensemble("x", &inc, C1, C2, phases, tol)?;
    let x0 = bounce_ensemble("x0", &inc, C0, C2, phases, tol)?;
    let mut rhat_members = x.members.clone();
    rhat_members.extend(x0.members.iter().cloned());
    let rhat = Ensemble::new("rhat", rhat_members)?;
    let rbar = Ensemble::new("rbar", x.members.clone())?;
    Ok(CounterexampleU {
        inc,
        u,
        u0,
        x,
        x0,
        rhat,
        rbar,
    })
}

#[derive(Debug, Clone)]
pub struct CounterexampleW {
    pub inc: Inclusion,
    pub w: Region,
    pub stilde: Ensemble,
    /// Transit time of one arc (equal for both by symmetry).
    pub arc_time: f64,
    /// Cycle period.
    pub period: f64,
}

pub const LENS_C1: Point = Point::new(-1.0, 0.0);
pub const LENS_C2: Point = Point::new(1.0, 0.0);
const LENS_RADIUS: f64 = 1.25;
const LENS_OFFSET: f64 = 0.75;

fn lens_inclusion() -> Inclusion {
    // unit-angular-speed clockwise rotations about the two arc centers
    let h1 = BranchField::new(BranchLabel::Branch1, |p: Point| {
        Vec2::new(p.x2 + LENS_OFFSET, -p.x1)
    })
    .with_jacobian(|_| [[0.0, 1.0], [-1.0, 0.0]]);
    let h2 = BranchField::new(BranchLabel::Branch2, |p: Point| {
        Vec2::new(p.x2 - LENS_OFFSET, -p.x1)
    })
    .with_jacobian(|_| [[0.0, 1.0], [-1.0, 0.0]]);
    Inclusion::new(h1, h2).expect("distinct labels")
}

/// Transit time of one lens arc at unit angular speed.
pub fn lens_arc_time() -> f64 {
    2.0 * 1.0f64.atan2(LENS_OFFSET)
}

fn lens_state(phase: f64) -> (Point, BranchLabel) {
    let ta = lens_arc_time();
    let tau = 2.0 * ta;
    let r = phase.rem_euclid(tau);
    if r < ta {
        // upper arc, clockwise about (0, -0.75), starting at c1
        let a0 = (LENS_OFFSET).atan2(-1.0);
        let ang = a0 - r;
        (
            Point::new(
                LENS_RADIUS * ang.cos(),
                -LENS_OFFSET + LENS_RADIUS * ang.sin(),
            ),
            BranchLabel::Branch1,
        )
    } else {
        // lower arc, clockwise about (0, 0.75), starting at c2
        let a0 = (-LENS_OFFSET).atan2(1.0);
        let ang = a0 - (r - ta);
        (
            Point::new(
                LENS_RADIUS * ang.cos(),
                LENS_OFFSET + LENS_RADIUS * ang.sin(),
            ),
            BranchLabel::Branch2,
        )
    }
}

/// The lens counterexample: two circular arcs joined at c1 and c2, each
/// branch sweeping one arc; every solution cycles around the lens boundary.
pub fn make_counterexample_w(tol: &Tolerances) -> Result<CounterexampleW> {
    make_counterexample_w_with_phases(16, tol)
}

pub fn make_counterexample_w_with_phases(
    phases: usize,
    tol: &Tolerances,
) -> Result<CounterexampleW> {
    let inc = lens_inclusion();
    let upper = Arc {
        center: Point::new(0.0, -LENS_OFFSET),
        radius: LENS_RADIUS,
        from_angle: (LENS_OFFSET).atan2(-1.0),
        to_angle: (LENS_OFFSET).atan2(1.0),
        clockwise: true,
    };
    let lower = Arc {
        center: Point::new(0.0, LENS_OFFSET),
        radius: LENS_RADIUS,
        from_angle: (-LENS_OFFSET).atan2(1.0),
        to_angle: (-LENS_OFFSET).atan2(-1.0),
        clockwise: true,
    };
    let w = Region::arc_chain(vec![upper, lower], tol.event_tol)?;

    let rule = EventRule {
        branch1: Some(BranchRule {
            event: EventSpec::Point { target: LENS_C2 },
            next: BranchLabel::Branch2,
        }),
        branch2: Some(BranchRule {
            event: EventSpec::Point { target: LENS_C1 },
            next: BranchLabel::Branch1,
        }),
    };
    let ta = lens_arc_time();
    let tau = 2.0 * ta;
    let mut members = Vec::new();
    let mut phase_list = vec![0.0, ta];
    phase_list.extend((0..phases).map(|k| tau * (k as f64 + 0.5) / phases as f64));
    for phase in phase_list {
        let (x0, initial) = lens_state(phase);
        members.push(build_from_events(
            &inc,
            x0,
            initial,
            &rule,
            TimeWindow::symmetric(T_WIN)?,
            2.0 * tau,
            tol,
        )?);
    }
    Ok(CounterexampleW {
        inc,
        w,
        stilde: Ensemble::new("stilde", members)?,
        arc_time: ta,
        period: tau,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thm24Kind {
    /// f1 a spiral sink, f2 a constant rightward jet.
    Spiral,
    /// f1 a straight sink, f2 a constant rightward jet; the loop degenerates
    /// to a segment with empty interior.
    Axis,
}

#[derive(Debug, Clone)]
pub struct Thm24Instance {
    pub kind: Thm24Kind,
    pub inc: Inclusion,
    /// Hyperbolic singular point of branch 1.
    pub a_star: Point,
    /// Loop anchor.
    pub anchor: Point,
    /// Compact region where branch 2 has no bounded solutions.
    pub k_region: Region,
}

pub const SPIRAL_MATRIX: [[f64; 2]; 2] = [[-0.1, -1.0], [1.0, -0.1]];

/// Radius contraction of one full spiral turn.
pub fn spiral_turn_contraction() -> f64 {
    (-0.2 * PI).exp()
}

/// Duration of the basic spiral loop: one turn plus the jet back.
pub fn spiral_loop_period() -> f64 {
    TAU + (1.0 - spiral_turn_contraction())
}

pub fn make_thm24_instance(kind: Thm24Kind) -> Result<Thm24Instance> {
    let f2 = BranchField::constant(BranchLabel::Branch2, Vec2::new(1.0, 0.0));
    let (f1, anchor) = match kind {
        Thm24Kind::Spiral => (
            BranchField::linear(BranchLabel::Branch1, SPIRAL_MATRIX),
            Point::new(1.0, 0.0),
        ),
        Thm24Kind::Axis => (
            BranchField::linear(BranchLabel::Branch1, [[-1.0, 0.0], [0.0, -1.0]]),
            Point::new(2.0, 0.0),
        ),
    };
    let inc = Inclusion::new(f1, f2)?;
    let n = 128;
    let k_region = Region::polygon(
        (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                Point::new(3.0 * a.cos(), 3.0 * a.sin())
            })
            .collect(),
        1e-6,
    )?;
    Ok(Thm24Instance {
        kind,
        inc,
        a_star: Point::new(0.0, 0.0),
        anchor,
        k_region,
    })
}

/// One loop-itinerary symbol: a single spiral turn or a double turn, each
/// closed by the horizontal jet back to the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopSymbol {
    Single,
    Double,
}

impl LoopSymbol {
    fn turns(self) -> f64 {
        match self {
            LoopSymbol::Single => 1.0,
            LoopSymbol::Double => 2.0,
        }
    }

    pub fn duration(self) -> f64 {
        let turn = TAU * self.turns();
        let radius = (-0.1 * turn).exp();
        turn + (1.0 - radius)
    }
}

/// State on the unit-anchored spiral a time `dt` into a turn.
fn spiral_state(dt: f64) -> Point {
    let r = (-0.1 * dt).exp();
    Point::new(r * dt.cos(), r * dt.sin())
}

/// Build the block-coded spiral solution: single-turn loops since forever,
/// the word's loop blocks laid out around t = 0, then a permanent escape
/// along branch 2. The escape tail pins the time origin, so distinct words
/// are never shift-equivalent.
fn itinerary_member(
    inst: &Thm24Instance,
    word: &[LoopSymbol],
    half_window: f64,
    tol: &Tolerances,
) -> Result<SolutionWindow> {
    let word_len: f64 = word.iter().map(|s| s.duration()).sum();
    let t_word = -word_len / 2.0;
    let w = TimeWindow::symmetric(half_window)?;

    // earliest single-loop boundary at or below the window start
    let pad = LoopSymbol::Single.duration();
    let k_back = ((t_word - w.t0) / pad).ceil() as i64;
    let mut t = t_word - k_back as f64 * pad;

    // lay out (start_time, symbol) blocks, then the escape tail
    let mut blocks: Vec<(f64, Option<LoopSymbol>)> = Vec::new();
    while t < t_word - 1e-12 {
        blocks.push((t, Some(LoopSymbol::Single)));
        t += pad;
    }
    for &sym in word {
        blocks.push((t, Some(sym)));
        t += sym.duration();
    }
    blocks.push((t, None));

    let mut segments: Vec<Segment> = Vec::new();
    for &(t_block, sym) in &blocks {
        match sym {
            Some(sym) => {
                let turn = TAU * sym.turns();
                let jet_start = t_block + turn;
                let t_end = t_block + sym.duration();
                if t_end <= w.t0 || t_block >= w.t1 {
                    continue;
                }
                let lo = t_block.max(w.t0);
                let hi = jet_start.min(w.t1);
                if hi > lo + 1e-12 {
                    let x_lo = spiral_state(lo - t_block);
                    segments.push(integrate_branch(inst.inc.branch1(), x_lo, lo, hi, tol)?);
                }
                let lo = jet_start.max(w.t0);
                let hi = t_end.min(w.t1);
                if hi > lo + 1e-12 {
                    let radius = (-0.1 * turn).exp();
                    let x_lo = Point::new(radius + (lo - jet_start), 0.0);
                    segments.push(integrate_branch(inst.inc.branch2(), x_lo, lo, hi, tol)?);
                }
            }
            None => {
                // escape along branch 2 from the anchor
                let lo = t_block.max(w.t0);
                if lo < w.t1 - 1e-12 {
                    let x_lo = Point::new(inst.anchor.x1 + (lo - t_block), 0.0);
                    segments.push(integrate_branch(inst.inc.branch2(), x_lo, lo, w.t1, tol)?);
                }
            }
        }
    }
    SolutionWindow::from_segments(segments, Provenance::Synthetic, tol.match_tol)
}

/// All 2^depth loop itineraries of the spiral instance on a window wide
/// enough for the s = depth·τ_loop horizon.
pub fn make_itinerary_ensemble(depth: usize, tol: &Tolerances) -> Result<Ensemble> {
    if depth == 0 || depth > 5 {
        return Err(Error::Parameter("itinerary depth must be 1..=5".into()));
    }
    let inst = make_thm24_instance(Thm24Kind::Spiral)?;
    let half_window = 60.0;
    let mut members = Vec::new();
    for code in 0..(1usize << depth) {
        let word: Vec<LoopSymbol> = (0..depth)
            .map(|b| {
                if code & (1 << b) != 0 {
                    LoopSymbol::Double
                } else {
                    LoopSymbol::Single
                }
            })
            .collect();
        members.push(itinerary_member(&inst, &word, half_window, tol)?);
    }
    Ensemble::new(format!("itineraries-n{depth}"), members)
}

/// Adjustment speeds and linear behavioural coefficients of the
/// IS-LM/QY-ML inclusion: I = i0 − i_r·R + i_y·Y, S = s0 + s_y·Y,
/// L = l0 + l_y·Y − l_r·R, M = m0, Q = q0 + q_y·Y − q_r·R.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EconParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub i0: f64,
    pub i_r: f64,
    pub i_y: f64,
    pub s0: f64,
    pub s_y: f64,
    pub l0: f64,
    pub l_y: f64,
    pub l_r: f64,
    pub m0: f64,
    pub q0: f64,
    pub q_y: f64,
    pub q_r: f64,
}

/// Default parameter set, kept in a versioned config file: the recession
/// branch has a stable spiral equilibrium and the expansion branch a saddle,
/// both in the positive quadrant.
pub const ISLM_DEFAULT_JSON: &str = include_str!("../config/islm_qyml_default.json");

impl Default for EconParams {
    fn default() -> Self {
        serde_json::from_str(ISLM_DEFAULT_JSON).expect("default econ config parses")
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ] {
            if !(v > 0.0) {
                return Err(Error::Parameter(format!(
                    "adjustment speed {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// I − S as a + b·Y + c·R.
    fn is_ls_bracket(&self) -> (f64, f64, f64) {
        (self.i0 - self.s0, self.i_y - self.s_y, -self.i_r)
    }

    /// L − M as a + b·Y + c·R.
    fn lm_bracket(&self) -> (f64, f64, f64) {
        (self.l0 - self.m0, self.l_y, -self.l_r)
    }

    /// Q − Y as a + b·Y + c·R.
    fn qy_bracket(&self) -> (f64, f64, f64) {
        (self.q0, self.q_y - 1.0, -self.q_r)
    }

    pub fn branch1_equilibrium(&self) -> Result<Point> {
        let (a1, b1, c1) = self.is_ls_bracket();
        let (a2, b2, c2) = self.lm_bracket();
        solve_2x2(b1, c1, -a1, b2, c2, -a2)
    }

    pub fn branch2_equilibrium(&self) -> Result<Point> {
        let (a1, b1, c1) = self.qy_bracket();
        let (a2, b2, c2) = self.lm_bracket();
        // branch 2 zeroes M − L, the same zero set as L − M
        solve_2x2(b1, c1, -a1, b2, c2, -a2)
    }
}

fn solve_2x2(a: f64, b: f64, e: f64, c: f64, d: f64, f: f64) -> Result<Point> {
    let det = a * d - b * c;
    if det.abs() < 1e-12 {
        return Err(Error::Parameter("singular equilibrium system".into()));
    }
    Ok(Point::new((e * d - b * f) / det, (a * f - e * c) / det))
}

/// Assemble the two-branch business-cycle inclusion: branch 1 the IS-LM
/// recession dynamics, branch 2 the QY-ML expansion dynamics.
pub fn make_islm_qyml(params: &EconParams) -> Result<Inclusion> {
    params.validate()?;
    let p = *params;
    let (ia, ib, ic) = p.is_ls_bracket();
    let (la, lb, lc) = p.lm_bracket();
    let (qa, qb, qc) = p.qy_bracket();

    let f1 = BranchField::new(BranchLabel::Branch1, move |x: Point| {
        Vec2::new(
            p.alpha1 * (ia + ib * x.x1 + ic * x.x2),
            p.beta1 * (la + lb * x.x1 + lc * x.x2),
        )
    })
    .with_jacobian(move |_| [[p.alpha1 * ib, p.alpha1 * ic], [p.beta1 * lb, p.beta1 * lc]]);
    let f2 = BranchField::new(BranchLabel::Branch2, move |x: Point| {
        Vec2::new(
            p.alpha2 * (qa + qb * x.x1 + qc * x.x2),
            -p.beta2 * (la + lb * x.x1 + lc * x.x2),
        )
    })
    .with_jacobian(move |_| {
        [
            [p.alpha2 * qb, p.alpha2 * qc],
            [-p.beta2 * lb, -p.beta2 * lc],
        ]
    });
    Inclusion::new(f1, f2)
}

/// Event rule for the business cycle: recession until income falls through
/// `y_low` (trough), expansion until it rises through `y_high` (peak).
pub fn islm_cycle_rule(y_low: f64, y_high: f64) -> EventRule {
    EventRule {
        branch1: Some(BranchRule {
            event: EventSpec::Section {
                origin: Point::new(y_low, 0.0),
                normal: Vec2::new(1.0, 0.0),
                crossing: crate::integrate::Crossing::PosToNeg,
            },
            next: BranchLabel::Branch2,
        }),
        branch2: Some(BranchRule {
            event: EventSpec::Section {
                origin: Point::new(y_high, 0.0),
                normal: Vec2::new(1.0, 0.0),
                crossing: crate::integrate::Crossing::NegToPos,
            },
            next: BranchLabel::Branch1,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// Switch from branch 1 to branch 2 (recession ends).
    Trough,
    /// Switch from branch 2 to branch 1 (expansion ends).
    Peak,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSwitch {
    pub t: f64,
    pub point: Point,
    pub kind: PhaseKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CyclePhaseReport {
    pub switches: Vec<PhaseSwitch>,
    /// Durations between consecutive switches.
    pub phase_durations: Vec<f64>,
    /// Set when the solution never switches.
    pub empty: bool,
}

/// Label every switch of a solution as trough or peak and report the phase
/// durations between them.
pub fn detect_cycle_phases(sol: &SolutionWindow) -> CyclePhaseReport {
    let mut switches = Vec::new();
    for &t in &sol.switch_times {
        let before = sol.branch_at(t - 1e-9);
        let after = sol.branch_at(t + 1e-9);
        if before == after {
            continue;
        }
        let kind = match (before, after) {
            (BranchLabel::Branch1, BranchLabel::Branch2) => PhaseKind::Trough,
            _ => PhaseKind::Peak,
        };
        let point = sol.eval(t).unwrap_or(Point::new(f64::NAN, f64::NAN));
        switches.push(PhaseSwitch { t, point, kind });
    }
    let phase_durations = switches.windows(2).map(|w| w[1].t - w[0].t).collect();
    CyclePhaseReport {
        empty: switches.is_empty(),
        switches,
        phase_durations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricConfig;
    use crate::solution::detect_period;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn u_members_have_period_two_and_unit_intervals() {
        let cu = make_counterexample_u_with_phases(4, &tols()).unwrap();
        for m in &cu.x.members {
            let tau = detect_period(m, &tols()).expect("periodic");
            assert!((tau - 2.0).abs() < 1e-4, "period {tau}");
            for d in m.switch_intervals() {
                assert!((d - 1.0).abs() < 1e-4, "interval {d}");
            }
        }
        for m in &cu.x0.members {
            let tau = detect_period(m, &tols()).expect("periodic");
            assert!((tau - 1.0).abs() < 1e-4, "period {tau}");
        }
    }

    #[test]
    fn u_members_stay_on_the_segment() {
        let cu = make_counterexample_u_with_phases(4, &tols()).unwrap();
        for m in &cu.x.members {
            let mut t = m.window.t0;
            while t <= m.window.t1 {
                let p = m.eval(t).unwrap();
                assert!(cu.u.contains(p).unwrap_or(false), "left U at t={t}: {p:?}");
                t += 1.3;
            }
        }
    }

    #[test]
    fn lens_fields_are_tangent_to_the_arcs() {
        let cw = make_counterexample_w_with_phases(4, &tols()).unwrap();
        // at 32 sampled points per arc the field has no radial component
        for (arc_idx, arc) in cw.w.arcs.iter().enumerate() {
            let field = if arc_idx == 0 {
                cw.inc.branch1()
            } else {
                cw.inc.branch2()
            };
            for p in arc.sample(arc.radius * arc.sweep() / 32.0) {
                let radial = p - arc.center;
                let v = field.eval(p);
                let dot = radial.x1 * v.x1 + radial.x2 * v.x2;
                assert!(dot.abs() <= 1e-10, "radial component {dot} at {p:?}");
            }
        }
    }

    #[test]
    fn lens_field_at_c1_points_into_the_lens() {
        let cw = make_counterexample_w_with_phases(4, &tols()).unwrap();
        let v = cw.inc.branch1().eval(LENS_C1);
        assert!((v.x1 - 0.75).abs() < 1e-12 && (v.x2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lens_period_matches_arc_angle() {
        let cw = make_counterexample_w_with_phases(4, &tols()).unwrap();
        assert!((cw.arc_time - 1.8546).abs() < 1e-3);
        for m in &cw.stilde.members {
            let tau = detect_period(m, &tols()).expect("periodic");
            assert!((tau - 3.7092).abs() < 1e-3, "period {tau}");
        }
    }

    #[test]
    fn spiral_eigenvalues_are_a_sink() {
        // eigenvalues of the spiral matrix: −0.1 ± i
        let a = SPIRAL_MATRIX;
        let tr = a[0][0] + a[1][1];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let disc = tr * tr - 4.0 * det;
        assert!(disc < 0.0 && tr < 0.0);
        assert!((tr / 2.0 + 0.1).abs() < 1e-12);
        assert!(((-disc).sqrt() / 2.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn itinerary_words_are_pairwise_separated() {
        let tol = tols();
        let ens = make_itinerary_ensemble(2, &tol).unwrap();
        assert_eq!(ens.len(), 4);
        let cfg = MetricConfig::default();
        let s = 2.0 * spiral_loop_period();
        let mat = crate::metric::distance_matrix(&ens.members, s, &cfg).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(mat[i][j] > 0.05, "members {i},{j} at distance {}", mat[i][j]);
                }
            }
        }
    }

    #[test]
    fn islm_fields_vanish_at_their_equilibria() {
        let params = EconParams::default();
        let inc = make_islm_qyml(&params).unwrap();
        let e1 = params.branch1_equilibrium().unwrap();
        let e2 = params.branch2_equilibrium().unwrap();
        assert!(e1.x1 > 0.0 && e1.x2 > 0.0, "branch1 equilibrium {e1:?}");
        assert!(e2.x1 > 0.0 && e2.x2 > 0.0, "branch2 equilibrium {e2:?}");
        assert!(inc.branch1().eval(e1).norm() <= 1e-10);
        assert!(inc.branch2().eval(e2).norm() <= 1e-10);
    }

    #[test]
    fn islm_rate_response_signs() {
        // with i_r > 0, raising R lowers Ẏ on branch 1
        let params = EconParams::default();
        let inc = make_islm_qyml(&params).unwrap();
        let p = Point::new(3.0, 1.0);
        let q = Point::new(3.0, 1.5);
        assert!(inc.branch1().eval(q).x1 < inc.branch1().eval(p).x1);
    }

    #[test]
    fn islm_rate_brackets_are_negated() {
        let params = EconParams::default();
        let inc = make_islm_qyml(&params).unwrap();
        for p in [
            Point::new(2.0, 1.0),
            Point::new(4.0, 0.5),
            Point::new(3.3, 2.2),
        ] {
            let r1 = inc.branch1().eval(p).x2 / params.beta1;
            let r2 = inc.branch2().eval(p).x2 / params.beta2;
            assert!((r1 + r2).abs() < 1e-12, "brackets not negated at {p:?}");
        }
    }

    #[test]
    fn non_positive_speed_rejected() {
        let mut p = EconParams::default();
        p.beta2 = 0.0;
        assert!(make_islm_qyml(&p).is_err());
    }

    #[test]
    fn jacobians_of_shipped_fields_match_finite_differences() {
        let pts: Vec<Point> = (0..12)
            .map(|i| Point::new(0.4 * i as f64 - 2.0, 0.3 * i as f64 - 1.5))
            .collect();
        let mut fields = Vec::new();
        let cu = make_counterexample_u_with_phases(1, &tols()).unwrap();
        fields.push(cu.inc.branch1().clone());
        fields.push(cu.inc.branch2().clone());
        let cw = lens_inclusion();
        fields.push(cw.branch1().clone());
        fields.push(cw.branch2().clone());
        let spiral = make_thm24_instance(Thm24Kind::Spiral).unwrap();
        fields.push(spiral.inc.branch1().clone());
        fields.push(spiral.inc.branch2().clone());
        let econ = make_islm_qyml(&EconParams::default()).unwrap();
        fields.push(econ.branch1().clone());
        fields.push(econ.branch2().clone());
        for f in fields {
            let err = f.jacobian_fd_error(&pts).expect("jacobian declared");
            assert!(err <= 1e-4, "fd mismatch {err}");
        }
    }

    #[test]
    fn cycle_phase_labels_alternate_on_the_bounce() {
        let cu = make_counterexample_u_with_phases(1, &tols()).unwrap();
        let report = detect_cycle_phases(&cu.x.members[0]);
        assert!(!report.empty);
        assert!(report.switches.len() > 10);
        for w in report.switches.windows(2) {
            assert_ne!(w[0].kind, w[1].kind, "labels must alternate");
        }
        // switches at c2 end the branch-1 run: troughs under this labeling
        for s in &report.switches {
            match s.kind {
                PhaseKind::Trough => assert!(s.point.dist(C2) < 1e-4),
                PhaseKind::Peak => assert!(s.point.dist(C1) < 1e-4),
            }
        }
    }
}
