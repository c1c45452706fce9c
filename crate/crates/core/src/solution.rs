//! Switching solutions over finite time windows: construction from switch
//! schedules or event rules, the shift action, a.e.-inclusion verification,
//! and period detection.

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::inclusion::{BranchField, BranchLabel, Inclusion, Tolerances};
use crate::integrate::{hit_event, integrate_branch, Crossing, EventSpec, Segment};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t0: f64,
    pub t1: f64,
}

impl TimeWindow {
    pub fn new(t0: f64, t1: f64) -> Result<Self> {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::Parameter(format!("bad window [{t0}, {t1}]")));
        }
        Ok(TimeWindow { t0, t1 })
    }

    /// Symmetric window [−half, half].
    pub fn symmetric(half: f64) -> Result<Self> {
        TimeWindow::new(-half, half)
    }

    pub fn len(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 - 1e-12 && t <= self.t1 + 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Schedule,
    EventRule,
    Concatenation,
    Synthetic,
}

/// Explicit switching timetable. `initial_branch` is the branch active on
/// the inter-switch interval containing t = 0 (the branch starting at 0 when
/// 0 itself is a switch time).
#[derive(Debug, Clone)]
pub struct Schedule {
    pub switch_times: Vec<f64>,
    pub initial_branch: BranchLabel,
    pub window: TimeWindow,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !self.window.contains(0.0) {
            return Err(Error::Parameter("schedule window must contain 0".into()));
        }
        for w in self.switch_times.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Parameter("switch times must strictly increase".into()));
            }
        }
        if let (Some(&first), Some(&last)) = (self.switch_times.first(), self.switch_times.last()) {
            if !self.window.contains(first) || !self.window.contains(last) {
                return Err(Error::Parameter("switch times must lie in the window".into()));
            }
        }
        Ok(())
    }
}

/// Event-triggered switching: when the active branch's event fires, the
/// solution switches to `next`. A branch without a rule is terminal (the
/// solution stays on it to the window edge).
#[derive(Debug, Clone, Copy)]
pub struct BranchRule {
    pub event: EventSpec,
    pub next: BranchLabel,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EventRule {
    pub branch1: Option<BranchRule>,
    pub branch2: Option<BranchRule>,
}

impl EventRule {
    pub fn rule(&self, label: BranchLabel) -> Option<&BranchRule> {
        match label {
            BranchLabel::Branch1 => self.branch1.as_ref(),
            BranchLabel::Branch2 => self.branch2.as_ref(),
        }
    }

    /// Branch whose rule switches into `label`, if any.
    fn predecessor(&self, label: BranchLabel) -> Option<BranchLabel> {
        for src in [BranchLabel::Branch1, BranchLabel::Branch2] {
            if let Some(r) = self.rule(src) {
                if r.next == label {
                    return Some(src);
                }
            }
        }
        None
    }
}

/// A solution sampled on a finite window, as an ordered list of one-branch
/// segments abutting within `match_tol`.
#[derive(Debug, Clone)]
pub struct SolutionWindow {
    pub segments: Vec<Segment>,
    pub window: TimeWindow,
    pub provenance: Provenance,
    /// Times of branch-change joins, ascending.
    pub switch_times: Vec<f64>,
}

impl SolutionWindow {
    /// Assemble from abutting segments, validating continuity and coverage.
    /// Switch times are the joins where the branch label changes.
    pub fn from_segments(
        segments: Vec<Segment>,
        provenance: Provenance,
        match_tol: f64,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Parameter("solution needs at least one segment".into()));
        }
        let mut switch_times = Vec::new();
        for (i, pair) in segments.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if (a.t_end - b.t_start).abs() > 1e-9 {
                return Err(Error::ConcatenationMismatch {
                    index: i,
                    gap: (a.t_end - b.t_start).abs(),
                    at: a.end_point(),
                });
            }
            let gap = a.end_point().dist(b.start_point());
            if gap > match_tol {
                return Err(Error::ConcatenationMismatch {
                    index: i,
                    gap,
                    at: a.end_point(),
                });
            }
            if a.branch != b.branch {
                switch_times.push(b.t_start);
            }
        }
        let window = TimeWindow::new(segments[0].t_start, segments.last().unwrap().t_end)?;
        Ok(SolutionWindow {
            segments,
            window,
            provenance,
            switch_times,
        })
    }

    pub fn eval(&self, t: f64) -> Result<Point> {
        if !self.window.contains(t) {
            return Err(Error::OutsideWindow {
                t,
                lo: self.window.t0,
                hi: self.window.t1,
            });
        }
        let idx = self
            .segments
            .partition_point(|s| s.t_end < t)
            .min(self.segments.len() - 1);
        self.segments[idx].eval(t.clamp(self.segments[idx].t_start, self.segments[idx].t_end))
    }

    /// Branch label at time t; left-continuous at switch instants.
    pub fn branch_at(&self, t: f64) -> BranchLabel {
        let idx = self
            .segments
            .partition_point(|s| s.t_end < t)
            .min(self.segments.len() - 1);
        self.segments[idx].branch
    }

    pub fn state_at_zero(&self) -> Point {
        self.eval(0.0).expect("window contains 0")
    }

    /// Durations between consecutive switch times.
    pub fn switch_intervals(&self) -> Vec<f64> {
        self.switch_times.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn negated(field: &BranchField) -> BranchField {
    let inner = field.clone();
    BranchField::new(field.label, move |p| -inner.eval(p))
}

/// Integrate a branch backward: the state is known at the *right* end.
fn integrate_backward(
    field: &BranchField,
    x_right: Point,
    t_left: f64,
    t_right: f64,
    tol: &Tolerances,
) -> Result<Segment> {
    let rev = integrate_branch(&negated(field), x_right, 0.0, t_right - t_left, tol)?;
    let mut samples: Vec<(f64, Point)> = rev
        .samples
        .iter()
        .map(|&(s, p)| (t_right - s, p))
        .collect();
    samples.reverse();
    Ok(Segment {
        branch: field.label,
        samples,
        t_start: t_left,
        t_end: t_right,
    })
}

/// Build a solution whose branch is dictated by an explicit schedule.
/// `x0` is the state at t = 0; times before 0 are integrated backward.
pub fn build_from_schedule(
    inc: &Inclusion,
    x0: Point,
    sched: &Schedule,
    tol: &Tolerances,
) -> Result<SolutionWindow> {
    sched.validate()?;
    let w = sched.window;
    let pos: Vec<f64> = sched
        .switch_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < w.t1)
        .collect();
    let neg: Vec<f64> = sched
        .switch_times
        .iter()
        .copied()
        .filter(|&t| t <= 0.0 && t > w.t0)
        .collect();

    let mut segments = Vec::new();

    // forward sweep from 0
    let mut cur = sched.initial_branch;
    let mut t = 0.0;
    let mut x = x0;
    for &s in &pos {
        let seg = integrate_branch(inc.branch(cur), x, t, s, tol)?;
        x = seg.end_point();
        t = s;
        segments.push(seg);
        cur = cur.other();
    }
    if t < w.t1 {
        segments.push(integrate_branch(inc.branch(cur), x, t, w.t1, tol)?);
    }

    // backward sweep from 0; branch flips at each switch time going back
    let mut back = Vec::new();
    let mut cur = if neg.last().is_some_and(|&s| s == 0.0) {
        sched.initial_branch.other()
    } else {
        sched.initial_branch
    };
    let mut t = 0.0;
    let mut x = x0;
    for &s in neg.iter().rev() {
        if s == 0.0 {
            continue;
        }
        let seg = integrate_backward(inc.branch(cur), x, s, t, tol)?;
        x = seg.start_point();
        t = s;
        back.push(seg);
        cur = cur.other();
    }
    if t > w.t0 {
        back.push(integrate_backward(inc.branch(cur), x, w.t0, t, tol)?);
    }
    back.reverse();
    back.extend(segments);

    SolutionWindow::from_segments(back, Provenance::Schedule, tol.match_tol)
}

/// Build a solution by following event-triggered switching. `initial` is the
/// branch active at t = 0; `horizon` bounds the wait for each event.
pub fn build_from_events(
    inc: &Inclusion,
    x0: Point,
    initial: BranchLabel,
    rule: &EventRule,
    window: TimeWindow,
    horizon: f64,
    tol: &Tolerances,
) -> Result<SolutionWindow> {
    if !window.contains(0.0) {
        return Err(Error::Parameter("window must contain 0".into()));
    }
    if let Some(r) = rule.rule(initial) {
        if let EventSpec::Point { target } = r.event {
            if x0.dist(target) <= tol.event_tol {
                return Err(Error::DegenerateEvent { at: x0 });
            }
        }
    }

    // forward
    let mut fwd = Vec::new();
    let mut cur = initial;
    let mut t = 0.0;
    let mut x = x0;
    while t < window.t1 {
        match rule.rule(cur) {
            None => {
                fwd.push(integrate_branch(inc.branch(cur), x, t, window.t1, tol)?);
                t = window.t1;
            }
            Some(r) => {
                let remaining = window.t1 - t;
                match hit_event(inc.branch(cur), x, &r.event, horizon.min(remaining), tol) {
                    Ok(hit) => {
                        let seg = integrate_branch(inc.branch(cur), x, t, t + hit.t, tol)?;
                        t += hit.t;
                        // continue from the exact target when the event is a
                        // point, so switch times do not drift over many cycles
                        x = match r.event {
                            EventSpec::Point { target } => target,
                            EventSpec::Section { .. } => seg.end_point(),
                        };
                        fwd.push(seg);
                        cur = r.next;
                    }
                    Err(Error::NoEvent { .. }) => {
                        if horizon < remaining {
                            return Err(Error::NoEvent {
                                t_max: horizon,
                                closest: f64::NAN,
                            });
                        }
                        fwd.push(integrate_branch(inc.branch(cur), x, t, window.t1, tol)?);
                        t = window.t1;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    // backward: invert the rule — the switch into the current branch
    // happened at the predecessor's event point
    let mut back = Vec::new();
    let mut cur = initial;
    // a switch exactly at t = 0: the branch before 0 is the predecessor's
    if let Some(p) = rule.predecessor(initial) {
        if let Some(r) = rule.rule(p) {
            if let EventSpec::Point { target } = r.event {
                if x0.dist(target) <= tol.event_tol {
                    cur = p;
                }
            }
        }
    }
    let mut t = 0.0;
    let mut x = x0;
    while t > window.t0 {
        let pred = rule.predecessor(cur);
        let entry = pred.and_then(|p| rule.rule(p)).map(|r| r.event);
        match entry {
            None => {
                back.push(integrate_backward(inc.branch(cur), x, window.t0, t, tol)?);
                t = window.t0;
            }
            Some(event) => {
                let remaining = t - window.t0;
                let rev_event = flip_crossing(event);
                match hit_event(
                    &negated(inc.branch(cur)),
                    x,
                    &rev_event,
                    horizon.min(remaining),
                    tol,
                ) {
                    Ok(hit) => {
                        let seg = integrate_backward(inc.branch(cur), x, t - hit.t, t, tol)?;
                        t -= hit.t;
                        x = match event {
                            EventSpec::Point { target } => target,
                            EventSpec::Section { .. } => seg.start_point(),
                        };
                        back.push(seg);
                        cur = pred.unwrap();
                    }
                    Err(Error::NoEvent { .. }) => {
                        back.push(integrate_backward(inc.branch(cur), x, window.t0, t, tol)?);
                        t = window.t0;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    back.reverse();
    back.extend(fwd);

    let mut sol = SolutionWindow::from_segments(back, Provenance::EventRule, tol.match_tol)?;
    sol.window = window;
    Ok(sol)
}

fn flip_crossing(event: EventSpec) -> EventSpec {
    match event {
        EventSpec::Point { target } => EventSpec::Point { target },
        EventSpec::Section {
            origin,
            normal,
            crossing,
        } => EventSpec::Section {
            origin,
            normal,
            crossing: match crossing {
                Crossing::PosToNeg => Crossing::NegToPos,
                Crossing::NegToPos => Crossing::PosToNeg,
                Crossing::Any => Crossing::Any,
            },
        },
    }
}

/// The shift action: y(s) = x(t + s) on the window shrunk by the shift.
pub fn shift(sol: &SolutionWindow, t: f64) -> Result<SolutionWindow> {
    if t == 0.0 {
        return Ok(sol.clone());
    }
    if !(t > sol.window.t0 && t < sol.window.t1) {
        return Err(Error::WindowExhausted {
            shift: t,
            lo: sol.window.t0,
            hi: sol.window.t1,
        });
    }
    Ok(SolutionWindow {
        segments: sol.segments.iter().map(|s| s.shifted(-t)).collect(),
        window: TimeWindow::new(sol.window.t0 - t, sol.window.t1 - t)?,
        provenance: sol.provenance,
        switch_times: sol.switch_times.iter().map(|&s| s - t).collect(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionReport {
    pub max_residual: f64,
    pub violating_times: Vec<f64>,
    pub checked_samples: usize,
}

/// Check ẋ(t) ∈ {f₁(x(t)), f₂(x(t))} at interior sample points by central
/// differences, excluding a neighbourhood of each switch instant (the
/// derivative is unconstrained exactly at switches).
pub fn verify_inclusion(
    sol: &SolutionWindow,
    inc: &Inclusion,
    tol: &Tolerances,
    residual_tol: f64,
) -> InclusionReport {
    let exclusion = 2.0 * tol.integ_step;
    let mut max_residual: f64 = 0.0;
    let mut violating = Vec::new();
    let mut checked = 0;
    for seg in &sol.segments {
        for k in 1..seg.samples.len().saturating_sub(1) {
            let (tm, pm) = seg.samples[k - 1];
            let (t, p) = seg.samples[k];
            let (tp, pp) = seg.samples[k + 1];
            if sol
                .switch_times
                .iter()
                .any(|&s| (t - s).abs() <= exclusion)
            {
                continue;
            }
            let hm = t - tm;
            let hp = tp - t;
            if hm <= 0.0 || hp <= 0.0 {
                continue;
            }
            // three-point derivative, exact for quadratics on nonuniform grids
            let wm = -hp / (hm * (hm + hp));
            let w0 = (hp - hm) / (hm * hp);
            let wp = hm / (hp * (hm + hp));
            let v = crate::geom::Vec2::new(
                wm * pm.x1 + w0 * p.x1 + wp * pp.x1,
                wm * pm.x2 + w0 * p.x2 + wp * pp.x2,
            );
            let r1 = {
                let f = inc.branch1().eval(p);
                (v + -f).norm()
            };
            let r2 = {
                let f = inc.branch2().eval(p);
                (v + -f).norm()
            };
            let res = r1.min(r2);
            checked += 1;
            if res > max_residual {
                max_residual = res;
            }
            if res > residual_tol {
                violating.push(t);
            }
        }
    }
    InclusionReport {
        max_residual,
        violating_times: violating,
        checked_samples: checked,
    }
}

/// Smallest period τ with sup_t d(x(t+τ), x(t)) ≤ match_tol, scanned over
/// the switch-time lattice and polished locally. None when no candidate
/// matches (in particular for switchless solutions).
pub fn detect_period(sol: &SolutionWindow, tol: &Tolerances) -> Option<f64> {
    let switches = &sol.switch_times;
    if switches.len() < 2 {
        return None;
    }
    let max_tau = sol.window.len() / 4.0;
    let t0 = switches[0];
    let mut candidates: Vec<f64> = switches[1..]
        .iter()
        .map(|&s| s - t0)
        .filter(|&d| d > tol.time_grid && d <= max_tau)
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mismatch = |tau: f64| -> f64 {
        let lo = sol.window.t0;
        let hi = sol.window.t1 - tau;
        let mut t = lo;
        let mut worst: f64 = 0.0;
        while t <= hi {
            let a = sol.eval(t).ok();
            let b = sol.eval(t + tau).ok();
            if let (Some(a), Some(b)) = (a, b) {
                worst = worst.max(a.dist(b));
                if worst > 10.0 * tol.match_tol {
                    return worst;
                }
            }
            t += tol.time_grid;
        }
        worst
    };

    for tau in candidates {
        if mismatch(tau) <= tol.match_tol {
            // polish within one integration step
            let mut best = tau;
            let mut best_val = mismatch(tau);
            let span = tol.integ_step;
            for k in -4..=4 {
                let cand = tau + k as f64 * span / 4.0;
                if cand <= 0.0 {
                    continue;
                }
                let v = mismatch(cand);
                if v < best_val {
                    best_val = v;
                    best = cand;
                }
            }
            return Some(best);
        }
    }
    None
}

/// A finite set of solutions sharing one window, standing in for a solution
/// set D. Every chaos indicator downstream is relative to the ensemble.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub name: String,
    pub members: Vec<SolutionWindow>,
}

impl Ensemble {
    pub fn new(name: impl Into<String>, members: Vec<SolutionWindow>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Parameter("ensemble must be nonempty".into()));
        }
        let w = members[0].window;
        for m in &members[1..] {
            if (m.window.t0 - w.t0).abs() > 1e-9 || (m.window.t1 - w.t1).abs() > 1e-9 {
                return Err(Error::Parameter("ensemble members must share one window".into()));
            }
        }
        Ok(Ensemble {
            name: name.into(),
            members,
        })
    }

    pub fn window(&self) -> TimeWindow {
        self.members[0].window
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::inclusion::BranchLabel::*;

    fn u_inclusion() -> Inclusion {
        Inclusion::new(
            BranchField::constant(Branch1, Vec2::new(1.0, 0.0)),
            BranchField::constant(Branch2, Vec2::new(-1.0, 0.0)),
        )
        .unwrap()
    }

    fn u_rule() -> EventRule {
        EventRule {
            branch1: Some(BranchRule {
                event: EventSpec::Point {
                    target: Point::new(1.0, 0.0),
                },
                next: Branch2,
            }),
            branch2: Some(BranchRule {
                event: EventSpec::Point {
                    target: Point::new(0.0, 0.0),
                },
                next: Branch1,
            }),
        }
    }

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn single_branch_schedule_is_a_line() {
        let inc = u_inclusion();
        let sched = Schedule {
            switch_times: vec![],
            initial_branch: Branch1,
            window: TimeWindow::symmetric(1.0).unwrap(),
        };
        let sol = build_from_schedule(&inc, Point::new(0.0, 0.0), &sched, &tols()).unwrap();
        assert!(sol.eval(-1.0).unwrap().dist(Point::new(-1.0, 0.0)) < 1e-9);
        assert!(sol.eval(1.0).unwrap().dist(Point::new(1.0, 0.0)) < 1e-9);
        assert!(sol.switch_times.is_empty());
    }

    #[test]
    fn bounce_schedule_alternates_between_endpoints() {
        let inc = u_inclusion();
        let sched = Schedule {
            switch_times: vec![-2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
            initial_branch: Branch1,
            window: TimeWindow::new(-2.5, 3.5).unwrap(),
        };
        let sol = build_from_schedule(&inc, Point::new(0.0, 0.0), &sched, &tols()).unwrap();
        for k in [-1.0f64, 1.0, 3.0] {
            assert!(
                sol.eval(k).unwrap().dist(Point::new(1.0, 0.0)) < 1e-9,
                "t = {k}"
            );
        }
        for k in [-2.0f64, 0.0, 2.0] {
            assert!(sol.eval(k).unwrap().dist(Point::new(0.0, 0.0)) < 1e-9, "t = {k}");
        }
    }

    #[test]
    fn schedule_switch_between_agreeing_branches_is_invisible() {
        let inc = Inclusion::new(
            BranchField::constant(Branch1, Vec2::new(1.0, 0.0)),
            BranchField::constant(Branch2, Vec2::new(1.0, 0.0)),
        )
        .unwrap();
        let sched = Schedule {
            switch_times: vec![0.5],
            initial_branch: Branch1,
            window: TimeWindow::new(-0.25, 1.0).unwrap(),
        };
        let sol = build_from_schedule(&inc, Point::new(0.0, 0.0), &sched, &tols()).unwrap();
        let plain = integrate_branch(inc.branch1(), Point::new(-0.25, 0.0), -0.25, 1.0, &tols())
            .unwrap();
        for k in 0..=10 {
            let t = -0.25 + 1.25 * k as f64 / 10.0;
            assert!(sol.eval(t).unwrap().dist(plain.eval(t).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn event_rule_bounce_switch_times() {
        let inc = u_inclusion();
        let sol = build_from_events(
            &inc,
            Point::new(0.25, 0.0),
            Branch1,
            &u_rule(),
            TimeWindow::symmetric(8.0).unwrap(),
            5.0,
            &tols(),
        )
        .unwrap();
        let fwd: Vec<f64> = sol
            .switch_times
            .iter()
            .copied()
            .filter(|&t| t > 0.0)
            .collect();
        for (k, &t) in fwd.iter().enumerate() {
            assert!(
                (t - (0.75 + k as f64)).abs() < 1e-5,
                "switch {k} at {t}, expected {}",
                0.75 + k as f64
            );
        }
        let period = detect_period(&sol, &tols()).expect("bounce is periodic");
        assert!((period - 2.0).abs() < 1e-4, "period {period}");
    }

    #[test]
    fn degenerate_event_rejected() {
        let inc = u_inclusion();
        let res = build_from_events(
            &inc,
            Point::new(1.0, 0.0),
            Branch1,
            &u_rule(),
            TimeWindow::symmetric(4.0).unwrap(),
            5.0,
            &tols(),
        );
        assert!(matches!(res, Err(Error::DegenerateEvent { .. })));
    }

    #[test]
    fn shift_by_period_matches_original() {
        let inc = u_inclusion();
        let sol = build_from_events(
            &inc,
            Point::new(0.25, 0.0),
            Branch1,
            &u_rule(),
            TimeWindow::symmetric(10.0).unwrap(),
            5.0,
            &tols(),
        )
        .unwrap();
        let shifted = shift(&sol, 2.0).unwrap();
        let mut t = -7.9;
        while t < 7.9 {
            let a = sol.eval(t).unwrap();
            let b = shifted.eval(t).unwrap();
            assert!(a.dist(b) < 1e-4, "t = {t}: {a:?} vs {b:?}");
            t += 0.37;
        }
    }

    #[test]
    fn shift_zero_is_identity_and_composition_adds() {
        let inc = u_inclusion();
        let sol = build_from_events(
            &inc,
            Point::new(0.25, 0.0),
            Branch1,
            &u_rule(),
            TimeWindow::symmetric(10.0).unwrap(),
            5.0,
            &tols(),
        )
        .unwrap();
        let s0 = shift(&sol, 0.0).unwrap();
        assert_eq!(s0.window, sol.window);
        let ab = shift(&shift(&sol, 1.3).unwrap(), 0.9).unwrap();
        let once = shift(&sol, 2.2).unwrap();
        let mut t = -7.0;
        while t < 7.0 {
            assert!(ab.eval(t).unwrap().dist(once.eval(t).unwrap()) < 1e-9);
            t += 0.53;
        }
    }

    #[test]
    fn shift_beyond_window_errors() {
        let inc = u_inclusion();
        let sched = Schedule {
            switch_times: vec![],
            initial_branch: Branch1,
            window: TimeWindow::symmetric(1.0).unwrap(),
        };
        let sol = build_from_schedule(&inc, Point::new(0.0, 0.0), &sched, &tols()).unwrap();
        assert!(matches!(
            shift(&sol, 1.5),
            Err(Error::WindowExhausted { .. })
        ));
    }

    #[test]
    fn verify_inclusion_accepts_built_solutions() {
        let inc = u_inclusion();
        let sol = build_from_events(
            &inc,
            Point::new(0.25, 0.0),
            Branch1,
            &u_rule(),
            TimeWindow::symmetric(8.0).unwrap(),
            5.0,
            &tols(),
        )
        .unwrap();
        let rep = verify_inclusion(&sol, &inc, &tols(), 1e-3);
        assert!(rep.max_residual <= 1e-3, "residual {}", rep.max_residual);
        assert!(rep.violating_times.is_empty());
    }

    #[test]
    fn verify_inclusion_flags_planted_corruption() {
        let inc = u_inclusion();
        let mut sol = build_from_events(
            &inc,
            Point::new(0.25, 0.0),
            Branch1,
            &u_rule(),
            TimeWindow::symmetric(8.0).unwrap(),
            5.0,
            &tols(),
        )
        .unwrap();
        // corrupt one interior segment: double-speed drift breaks both branches
        let n = sol.segments.len() / 2;
        let seg = &mut sol.segments[n];
        let t0 = seg.t_start;
        for (t, p) in seg.samples.iter_mut() {
            p.x1 += 0.1 * (*t - t0);
        }
        let rep = verify_inclusion(&sol, &inc, &tols(), 1e-3);
        assert!(!rep.violating_times.is_empty());
    }

    #[test]
    fn equilibrium_has_zero_residual() {
        let inc = Inclusion::new(
            BranchField::linear(Branch1, [[-1.0, 0.0], [0.0, -1.0]]),
            BranchField::linear(Branch2, [[-2.0, 0.0], [0.0, -2.0]]),
        )
        .unwrap();
        let sched = Schedule {
            switch_times: vec![],
            initial_branch: Branch1,
            window: TimeWindow::symmetric(1.0).unwrap(),
        };
        let sol = build_from_schedule(&inc, Point::new(0.0, 0.0), &sched, &tols()).unwrap();
        let rep = verify_inclusion(&sol, &inc, &tols(), 1e-3);
        assert!(rep.max_residual <= 1e-12);
    }

    #[test]
    fn straight_line_has_no_period() {
        let inc = u_inclusion();
        let sched = Schedule {
            switch_times: vec![],
            initial_branch: Branch1,
            window: TimeWindow::symmetric(10.0).unwrap(),
        };
        let sol = build_from_schedule(&inc, Point::new(0.0, 0.0), &sched, &tols()).unwrap();
        assert!(detect_period(&sol, &tols()).is_none());
    }

    #[test]
    fn period_is_shift_invariant() {
        let inc = u_inclusion();
        let sol = build_from_events(
            &inc,
            Point::new(0.25, 0.0),
            Branch1,
            &u_rule(),
            TimeWindow::symmetric(12.0).unwrap(),
            5.0,
            &tols(),
        )
        .unwrap();
        let p0 = detect_period(&sol, &tols()).unwrap();
        let p1 = detect_period(&shift(&sol, 0.7).unwrap(), &tols()).unwrap();
        assert!((p0 - p1).abs() < 1e-4);
    }

    #[test]
    fn ensemble_requires_common_window() {
        let inc = u_inclusion();
        let mk = |half: f64| {
            build_from_events(
                &inc,
                Point::new(0.25, 0.0),
                Branch1,
                &u_rule(),
                TimeWindow::symmetric(half).unwrap(),
                5.0,
                &tols(),
            )
            .unwrap()
        };
        assert!(Ensemble::new("bad", vec![mk(4.0), mk(5.0)]).is_err());
        assert!(Ensemble::new("ok", vec![mk(4.0), mk(4.0)]).is_ok());
    }
}
