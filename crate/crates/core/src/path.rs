//! Paths generated by solutions: extraction from ensembles, the
//! loop-based search used by the fixed-point construction, simplicity
//! checking, and concatenation into a single witness solution.

use crate::error::{Error, Result};
use crate::geom::{dist_to_segment, Point};
use crate::inclusion::{BranchLabel, Inclusion, Tolerances};
use crate::integrate::{hit_event, integrate_branch, EventSpec, Segment};
use crate::solution::{Ensemble, Provenance, SolutionWindow};

/// An oriented solution-generated curve from a = v(t0) to b = v(t1).
#[derive(Debug, Clone)]
pub struct PathCurve {
    pub a: Point,
    pub b: Point,
    pub t0: f64,
    pub t1: f64,
    /// One-branch pieces realizing the curve, abutting in time.
    pub pieces: Vec<Segment>,
}

impl PathCurve {
    pub fn from_pieces(pieces: Vec<Segment>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Parameter("path needs at least one piece".into()));
        }
        let a = pieces[0].start_point();
        let b = pieces.last().unwrap().end_point();
        Ok(PathCurve {
            a,
            b,
            t0: pieces[0].t_start,
            t1: pieces.last().unwrap().t_end,
            pieces,
        })
    }

    /// Flattened (t, point) samples, join duplicates removed.
    pub fn samples(&self) -> Vec<(f64, Point)> {
        let mut out: Vec<(f64, Point)> = Vec::new();
        for seg in &self.pieces {
            for &(t, p) in &seg.samples {
                if let Some(&(lt, _)) = out.last() {
                    if t <= lt + 1e-15 {
                        continue;
                    }
                }
                out.push((t, p));
            }
        }
        out
    }

    /// Branch changes at interior joins (the derivative discontinuities).
    pub fn interior_switches(&self) -> usize {
        self.pieces
            .windows(2)
            .filter(|w| w[0].branch != w[1].branch)
            .count()
    }

    /// Same curve on a clock starting at `new_t0`.
    pub fn retimed(&self, new_t0: f64) -> PathCurve {
        let dt = new_t0 - self.t0;
        PathCurve {
            a: self.a,
            b: self.b,
            t0: self.t0 + dt,
            t1: self.t1 + dt,
            pieces: self.pieces.iter().map(|s| s.shifted(dt)).collect(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }
}

#[derive(Debug, Clone)]
pub struct SimpleDiagnostics {
    pub interior_switches: usize,
    /// Interior sample times that fall within match_tol of an endpoint.
    pub endpoint_hits: Vec<f64>,
}

/// A path is simple when its derivative has finitely many discontinuities
/// (always true for finitely many pieces; the count is reported) and its
/// interior never returns to either endpoint.
pub fn is_simple(path: &PathCurve, tol: &Tolerances) -> (bool, SimpleDiagnostics) {
    let samples = path.samples();
    let mut hits = Vec::new();
    for &(t, p) in samples.iter().skip(1).take(samples.len().saturating_sub(2)) {
        if p.dist(path.a) <= tol.match_tol || p.dist(path.b) <= tol.match_tol {
            hits.push(t);
        }
    }
    let diag = SimpleDiagnostics {
        interior_switches: path.interior_switches(),
        endpoint_hits: hits,
    };
    (diag.endpoint_hits.is_empty(), diag)
}

/// Where branch switches are admissible. Restricted switching is what
/// breaks concatenation closure in the economically constrained models.
#[derive(Debug, Clone)]
pub enum SwitchRule {
    Anywhere,
    OnlyAt { points: Vec<Point>, tol: f64 },
}

impl SwitchRule {
    pub fn allows(&self, p: Point) -> bool {
        match self {
            SwitchRule::Anywhere => true,
            SwitchRule::OnlyAt { points, tol } => points.iter().any(|q| q.dist(p) <= *tol),
        }
    }
}

/// How candidate paths are generated.
pub enum PathGenerator<'a> {
    /// Extract subpaths of ensemble members passing through both endpoints.
    Ensemble(&'a Ensemble),
    /// The fixed-point strategy: approach the reference loop by `approach`
    /// (branch2 in the theorem hypotheses), ride the loop, leave by
    /// `approach` again. Direct one-branch flows are tried first.
    Loop {
        inc: &'a Inclusion,
        reference: &'a PathCurve,
        approach: BranchLabel,
        horizon: f64,
    },
}

/// Find a simple path from a to b generated by the given machinery. The
/// returned curve starts at clock 0.
pub fn find_simple_path(
    generator: &PathGenerator,
    a: Point,
    b: Point,
    tol: &Tolerances,
) -> Result<PathCurve> {
    match generator {
        PathGenerator::Ensemble(ens) => ensemble_path(ens, a, b, tol),
        PathGenerator::Loop {
            inc,
            reference,
            approach,
            horizon,
        } => loop_path(inc, reference, *approach, *horizon, a, b, tol),
    }
}

/// Times at which a solution passes within `snap` of a target point: one
/// entry per passage (near-misses over consecutive samples are clustered,
/// keeping the closest-approach time).
fn passage_times(sol: &SolutionWindow, target: Point, snap: f64) -> Vec<f64> {
    let cluster_gap = 0.05f64.max(8.0 * snap);
    let mut out: Vec<(f64, f64)> = Vec::new(); // (time, distance)
    for seg in &sol.segments {
        for w in seg.samples.windows(2) {
            let (t0, p0) = w[0];
            let (t1, p1) = w[1];
            let dist = dist_to_segment(target, p0, p1);
            if dist <= snap {
                let d = p1 - p0;
                let len2 = d.dot(d);
                let frac = if len2 > 0.0 {
                    ((target - p0).dot(d) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let t = t0 + frac * (t1 - t0);
                match out.last_mut() {
                    Some((lt, ld)) if t - *lt <= cluster_gap => {
                        if dist < *ld {
                            *lt = t;
                            *ld = dist;
                        }
                    }
                    _ => out.push((t, dist)),
                }
            }
        }
    }
    out.into_iter().map(|(t, _)| t).collect()
}

/// Segments of `sol` clipped to [t_a, t_b], with interpolated boundary
/// samples so the clip starts and ends exactly at the requested times.
pub fn clip_solution(sol: &SolutionWindow, t_a: f64, t_b: f64) -> Result<Vec<Segment>> {
    if !(t_a < t_b) {
        return Err(Error::Parameter("empty clip range".into()));
    }
    let mut out = Vec::new();
    for seg in &sol.segments {
        if seg.t_end <= t_a + 1e-15 || seg.t_start >= t_b - 1e-15 {
            continue;
        }
        let lo = seg.t_start.max(t_a);
        let hi = seg.t_end.min(t_b);
        let mut samples = Vec::new();
        samples.push((lo, seg.eval(lo)?));
        for &(t, p) in &seg.samples {
            if t > lo + 1e-12 && t < hi - 1e-12 {
                samples.push((t, p));
            }
        }
        samples.push((hi, seg.eval(hi)?));
        out.push(Segment {
            branch: seg.branch,
            samples,
            t_start: lo,
            t_end: hi,
        });
    }
    if out.is_empty() {
        return Err(Error::Parameter("clip range outside solution window".into()));
    }
    Ok(out)
}

fn ensemble_path(ens: &Ensemble, a: Point, b: Point, tol: &Tolerances) -> Result<PathCurve> {
    let snap = (10.0 * tol.match_tol).max(2.0 * tol.integ_step);
    let mut best: Option<PathCurve> = None;
    for member in &ens.members {
        let ta_list = passage_times(member, a, snap);
        if ta_list.is_empty() {
            continue;
        }
        let tb_list = passage_times(member, b, snap);
        for &ta in &ta_list {
            for &tb in &tb_list {
                if tb <= ta + tol.integ_step {
                    continue;
                }
                if let Some(ref cur) = best {
                    if tb - ta >= cur.duration() {
                        continue;
                    }
                }
                let pieces = clip_solution(member, ta, tb)?;
                let path = PathCurve::from_pieces(pieces)?.retimed(0.0);
                if path.a.dist(a) > tol.match_tol.max(snap) || path.b.dist(b) > tol.match_tol.max(snap) {
                    continue;
                }
                let (simple, _) = is_simple(&path, tol);
                if simple {
                    best = Some(path);
                }
            }
        }
    }
    best.ok_or_else(|| {
        Error::SearchExhausted(format!(
            "no ensemble member realizes a simple path ({}, {}) -> ({}, {})",
            a.x1, a.x2, b.x1, b.x2
        ))
    })
}

/// Intersection of segments [p0,p1] and [q0,q1]; returns the parameters
/// (s, u) in [0,1]² when they cross.
fn seg_intersect(p0: Point, p1: Point, q0: Point, q1: Point) -> Option<(f64, f64)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.x1 * s.x2 - r.x2 * s.x1;
    if denom.abs() < 1e-18 {
        return None;
    }
    let qp = q0 - p0;
    let t = (qp.x1 * s.x2 - qp.x2 * s.x1) / denom;
    let u = (qp.x1 * r.x2 - qp.x2 * r.x1) / denom;
    if (-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
        Some((t.clamp(0.0, 1.0), u.clamp(0.0, 1.0)))
    } else {
        None
    }
}

/// Reference-curve chords bucketed by x2-interval, so a short trajectory
/// step only tests the chords sharing its height band.
struct CurveIndex {
    /// (t0, p0, t1, p1) chords of the flattened curve.
    chords: Vec<(f64, Point, f64, Point)>,
    buckets: Vec<Vec<u32>>,
    y_lo: f64,
    cell: f64,
}

impl CurveIndex {
    fn build(reference: &PathCurve) -> CurveIndex {
        let samples = reference.samples();
        let mut chords = Vec::with_capacity(samples.len().saturating_sub(1));
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        for w in samples.windows(2) {
            let (t0, p0) = w[0];
            let (t1, p1) = w[1];
            y_lo = y_lo.min(p0.x2.min(p1.x2));
            y_hi = y_hi.max(p0.x2.max(p1.x2));
            chords.push((t0, p0, t1, p1));
        }
        let n_buckets = 256usize;
        let cell = ((y_hi - y_lo) / n_buckets as f64).max(1e-9);
        let mut buckets = vec![Vec::new(); n_buckets + 1];
        for (i, &(_, p0, _, p1)) in chords.iter().enumerate() {
            let b0 = (((p0.x2.min(p1.x2)) - y_lo) / cell).floor() as usize;
            let b1 = (((p0.x2.max(p1.x2)) - y_lo) / cell).floor() as usize;
            for b in b0..=b1.min(n_buckets) {
                buckets[b].push(i as u32);
            }
        }
        CurveIndex {
            chords,
            buckets,
            y_lo,
            cell,
        }
    }

    fn candidates(&self, y_min: f64, y_max: f64) -> impl Iterator<Item = u32> + '_ {
        let b0 = (((y_min - self.y_lo) / self.cell).floor() as isize).max(0) as usize;
        let b1 = (((y_max - self.y_lo) / self.cell).floor() as isize).max(0) as usize;
        let hi = self.buckets.len() - 1;
        (b0.min(hi)..=b1.min(hi)).flat_map(move |b| self.buckets[b].iter().copied())
    }
}

/// First crossing of the flow of `field` from x0 with the reference curve.
/// Returns (flow time, reference-curve time, crossing point).
fn flow_to_curve(
    inc: &Inclusion,
    branch: BranchLabel,
    x0: Point,
    reference: &PathCurve,
    horizon: f64,
    backward: bool,
    tol: &Tolerances,
) -> Result<(f64, f64, Point)> {
    let field = if backward {
        let f = inc.branch(branch).clone();
        crate::inclusion::BranchField::new(branch, move |p| -f.eval(p))
    } else {
        inc.branch(branch).clone()
    };
    let seg = integrate_branch(&field, x0, 0.0, horizon, tol)?;
    let index = CurveIndex::build(reference);
    // skip the immediate neighbourhood of x0 when it already sits on the curve
    let arm_dist = 4.0 * tol.integ_step;
    for w in seg.samples.windows(2) {
        let (t0, p0) = w[0];
        let (t1, p1) = w[1];
        // earliest crossing within this step
        let mut first: Option<(f64, f64)> = None;
        for ci in index.candidates(p0.x2.min(p1.x2), p0.x2.max(p1.x2)) {
            let (rt0, q0, rt1, q1) = index.chords[ci as usize];
            if let Some((s, u)) = seg_intersect(p0, p1, q0, q1) {
                let t_ref = rt0 + u * (rt1 - rt0);
                if first.is_none_or(|(fs, _)| s < fs) {
                    first = Some((s, t_ref));
                }
            }
        }
        if let Some((s, t_ref)) = first {
            let t_flow = t0 + s * (t1 - t0);
            let hit = p0.lerp(p1, s);
            if hit.dist(x0) <= arm_dist {
                continue;
            }
            return Ok((t_flow, t_ref, hit));
        }
    }
    Err(Error::SearchExhausted(format!(
        "flow from ({}, {}) does not reach the reference loop within {horizon}",
        x0.x1, x0.x2
    )))
}

fn nearest_time_on(reference: &PathCurve, p: Point) -> (f64, f64) {
    let samples = reference.samples();
    let mut best = (0.0, f64::INFINITY);
    for w in samples.windows(2) {
        let (t0, p0) = w[0];
        let (t1, p1) = w[1];
        let d = dist_to_segment(p, p0, p1);
        if d < best.1 {
            let seg = p1 - p0;
            let len2 = seg.dot(seg);
            let frac = if len2 > 0.0 {
                ((p - p0).dot(seg) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = (t0 + frac * (t1 - t0), d);
        }
    }
    best
}

/// Sub-curve of the reference loop from t_from to t_to following its
/// orientation, wrapping through the loop junction when needed. The pieces
/// are retimed to start at 0.
fn loop_subarc(reference: &PathCurve, t_from: f64, t_to: f64) -> Result<Vec<Segment>> {
    let sol = SolutionWindow::from_segments(
        reference.pieces.clone(),
        Provenance::Synthetic,
        f64::INFINITY,
    )?;
    let eps = 1e-9;
    let mut pieces = if t_to > t_from + eps {
        clip_solution(&sol, t_from, t_to)?
    } else {
        // wrap: [t_from, end] then [start, t_to], glued at the loop junction
        let mut first = if t_from < reference.t1 - eps {
            clip_solution(&sol, t_from, reference.t1)?
        } else {
            Vec::new()
        };
        let period = reference.duration();
        if t_to > reference.t0 + eps {
            let second = clip_solution(&sol, reference.t0, t_to)?;
            first.extend(second.into_iter().map(|s| s.shifted(period)));
        }
        first
    };
    // retime to a clock starting at 0
    if let Some(first) = pieces.first() {
        let dt = -first.t_start;
        for s in &mut pieces {
            *s = s.shifted(dt);
        }
    }
    Ok(pieces)
}

fn append_retimed(pieces: &mut Vec<Segment>, next: Vec<Segment>) {
    let Some(first) = next.first() else { return };
    let at = pieces.last().map_or(0.0, |s| s.t_end);
    let dt = at - first.t_start;
    for s in next {
        pieces.push(s.shifted(dt));
    }
}

fn loop_path(
    inc: &Inclusion,
    reference: &PathCurve,
    approach: BranchLabel,
    horizon: f64,
    a: Point,
    b: Point,
    tol: &Tolerances,
) -> Result<PathCurve> {
    if a.dist(b) <= tol.match_tol {
        // degenerate request: return the loop through the reference curve
        return loop_through(inc, reference, approach, horizon, a, tol);
    }

    // direct one-branch flows first
    for branch in [approach, approach.other()] {
        if let Ok(hit) = hit_event(
            inc.branch(branch),
            a,
            &EventSpec::Point { target: b },
            horizon,
            tol,
        ) {
            if hit.t > tol.integ_step {
                let seg = integrate_branch(inc.branch(branch), a, 0.0, hit.t, tol)?;
                let path = PathCurve::from_pieces(vec![seg])?;
                if is_simple(&path, tol).0 {
                    return Ok(path);
                }
            }
        }
    }

    // approach the loop from a, leave the loop toward b
    let on_ref = |p: Point| nearest_time_on(reference, p);
    let (t_a_ref, d_a) = on_ref(a);
    let (t_b_ref, d_b) = on_ref(b);
    let snap = (10.0 * tol.match_tol).max(2.0 * tol.integ_step);

    let mut pieces: Vec<Segment> = Vec::new();
    let t_entry = if d_a <= snap {
        t_a_ref
    } else {
        let (t_flow, t_ref, _hit) = flow_to_curve(inc, approach, a, reference, horizon, false, tol)?;
        pieces.push(integrate_branch(inc.branch(approach), a, 0.0, t_flow, tol)?);
        t_ref
    };
    let (t_exit, exit_flow_time) = if d_b <= snap {
        (t_b_ref, 0.0)
    } else {
        let (t_flow, t_ref, _hit) = flow_to_curve(inc, approach, b, reference, horizon, true, tol)?;
        (t_ref, t_flow)
    };

    let subarc = loop_subarc(reference, t_entry, t_exit)?;
    if !subarc.is_empty() {
        append_retimed(&mut pieces, subarc);
    }
    if exit_flow_time > 0.0 {
        let from = pieces
            .last()
            .map_or_else(|| reference.samples()[0].1, |s| s.end_point());
        let exit_seg = integrate_branch(inc.branch(approach), from, 0.0, exit_flow_time, tol)?;
        append_retimed(&mut pieces, vec![exit_seg]);
    }
    if pieces.is_empty() {
        return Err(Error::SearchExhausted("empty loop construction".into()));
    }
    let path = PathCurve::from_pieces(pieces)?;
    let (simple, diag) = is_simple(&path, tol);
    if !simple {
        return Err(Error::SearchExhausted(format!(
            "loop construction not simple: interior endpoint hits at {:?}",
            diag.endpoint_hits
        )));
    }
    if path.a.dist(a) > snap || path.b.dist(b) > snap {
        return Err(Error::SearchExhausted("loop construction misses endpoints".into()));
    }
    Ok(path)
}

/// Loop a → a: ride the whole reference loop re-anchored at a (for a on the
/// loop) or out-and-around through it (for interior a).
fn loop_through(
    inc: &Inclusion,
    reference: &PathCurve,
    approach: BranchLabel,
    horizon: f64,
    a: Point,
    tol: &Tolerances,
) -> Result<PathCurve> {
    let snap = (10.0 * tol.match_tol).max(2.0 * tol.integ_step);
    let (t_a, d_a) = nearest_time_on(reference, a);
    if d_a <= snap {
        let mut pieces = loop_subarc(reference, t_a, t_a)?;
        if pieces.is_empty() {
            pieces = reference.pieces.clone();
        }
        return PathCurve::from_pieces(pieces);
    }
    let (t_in_flow, t_entry, _) = flow_to_curve(inc, approach, a, reference, horizon, false, tol)?;
    let (t_out_flow, t_exit, _) = flow_to_curve(inc, approach, a, reference, horizon, true, tol)?;
    let mut pieces = vec![integrate_branch(inc.branch(approach), a, 0.0, t_in_flow, tol)?];
    append_retimed(&mut pieces, loop_subarc(reference, t_entry, t_exit)?);
    let from = pieces.last().unwrap().end_point();
    let back = integrate_branch(inc.branch(approach), from, 0.0, t_out_flow, tol)?;
    append_retimed(&mut pieces, vec![back]);
    PathCurve::from_pieces(pieces)
}

/// Concatenate paths end to end (they must already share junction times and
/// states) into one path and one witness solution realizing it.
pub fn concatenate(
    paths: &[PathCurve],
    rule: &SwitchRule,
    tol: &Tolerances,
) -> Result<(PathCurve, SolutionWindow)> {
    if paths.is_empty() {
        return Err(Error::Parameter("nothing to concatenate".into()));
    }
    let mut pieces: Vec<Segment> = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        if i > 0 {
            let prev = &paths[i - 1];
            if (p.t0 - prev.t1).abs() > 1e-9 {
                return Err(Error::ConcatenationMismatch {
                    index: i,
                    gap: (p.t0 - prev.t1).abs(),
                    at: prev.b,
                });
            }
            let gap = prev.b.dist(p.a);
            if gap > tol.match_tol {
                return Err(Error::ConcatenationMismatch {
                    index: i,
                    gap,
                    at: prev.b,
                });
            }
            let prev_branch = prev.pieces.last().unwrap().branch;
            let next_branch = p.pieces[0].branch;
            if prev_branch != next_branch && !rule.allows(p.a) {
                return Err(Error::SwitchForbidden { at: p.a });
            }
        }
        pieces.extend(p.pieces.iter().cloned());
    }
    let q = PathCurve::from_pieces(pieces.clone())?;
    let witness = SolutionWindow::from_segments(pieces, Provenance::Concatenation, tol.match_tol)?;
    Ok((q, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::inclusion::{BranchField, BranchLabel::*};
    use crate::solution::{build_from_events, BranchRule, EventRule, TimeWindow};

    fn u_inclusion() -> Inclusion {
        Inclusion::new(
            BranchField::constant(Branch1, Vec2::new(1.0, 0.0)),
            BranchField::constant(Branch2, Vec2::new(-1.0, 0.0)),
        )
        .unwrap()
    }

    fn bounce(x0: Point, initial: BranchLabel, half: f64) -> SolutionWindow {
        let rule = EventRule {
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
        };
        build_from_events(
            &u_inclusion(),
            x0,
            initial,
            &rule,
            TimeWindow::symmetric(half).unwrap(),
            5.0,
            &Tolerances::default(),
        )
        .unwrap()
    }

    fn u_ensemble() -> Ensemble {
        let members = vec![
            bounce(Point::new(0.0, 0.0), Branch1, 10.0),
            bounce(Point::new(0.5, 0.0), Branch1, 10.0),
            bounce(Point::new(0.5, 0.0), Branch2, 10.0),
        ];
        Ensemble::new("u", members).unwrap()
    }

    #[test]
    fn straight_segment_is_simple() {
        let tol = Tolerances::default();
        let inc = u_inclusion();
        let seg = integrate_branch(inc.branch1(), Point::new(0.0, 0.0), 0.0, 1.0, &tol).unwrap();
        let path = PathCurve::from_pieces(vec![seg]).unwrap();
        let (simple, diag) = is_simple(&path, &tol);
        assert!(simple);
        assert_eq!(diag.interior_switches, 0);
    }

    #[test]
    fn one_and_a_half_bounces_is_not_simple() {
        let tol = Tolerances::default();
        let sol = bounce(Point::new(0.0, 0.0), Branch1, 10.0);
        // c1 -> c2 -> c1 -> c2: interior revisits both endpoints
        let pieces = clip_solution(&sol, 0.0, 3.0).unwrap();
        let path = PathCurve::from_pieces(pieces).unwrap();
        let (simple, diag) = is_simple(&path, &tol);
        assert!(!simple);
        assert!(!diag.endpoint_hits.is_empty());
    }

    #[test]
    fn ensemble_search_finds_direct_flows() {
        let tol = Tolerances::default();
        let ens = u_ensemble();
        let gen = PathGenerator::Ensemble(&ens);
        let p = find_simple_path(&gen, Point::new(0.25, 0.0), Point::new(0.75, 0.0), &tol).unwrap();
        assert!((p.duration() - 0.5).abs() < 1e-3, "duration {}", p.duration());
        assert!(is_simple(&p, &tol).0);
        let q = find_simple_path(&gen, Point::new(0.75, 0.0), Point::new(0.25, 0.0), &tol).unwrap();
        assert!((q.duration() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn reversed_pair_concatenates_into_a_loop() {
        let tol = Tolerances::default();
        let ens = u_ensemble();
        let gen = PathGenerator::Ensemble(&ens);
        let a = Point::new(0.25, 0.0);
        let b = Point::new(0.75, 0.0);
        let ab = find_simple_path(&gen, a, b, &tol).unwrap();
        let ba = find_simple_path(&gen, b, a, &tol).unwrap().retimed(ab.t1);
        let (q, witness) = concatenate(&[ab, ba], &SwitchRule::Anywhere, &tol).unwrap();
        assert!(q.a.dist(q.b) < 1e-3);
        let rep = crate::solution::verify_inclusion(&witness, &u_inclusion(), &tol, 1e-3);
        assert!(rep.max_residual <= 1e-3);
    }

    #[test]
    fn concatenation_is_associative_on_samples() {
        let tol = Tolerances::default();
        let ens = u_ensemble();
        let gen = PathGenerator::Ensemble(&ens);
        let pts = [
            Point::new(0.1, 0.0),
            Point::new(0.5, 0.0),
            Point::new(0.9, 0.0),
            Point::new(0.3, 0.0),
        ];
        let mut paths = Vec::new();
        let mut at = 0.0;
        for w in pts.windows(2) {
            let p = find_simple_path(&gen, w[0], w[1], &tol).unwrap().retimed(at);
            at = p.t1;
            paths.push(p);
        }
        let (q_all, _) = concatenate(&paths, &SwitchRule::Anywhere, &tol).unwrap();
        let (q12, _) = concatenate(&paths[0..2], &SwitchRule::Anywhere, &tol).unwrap();
        let (q_left, _) =
            concatenate(&[q12, paths[2].clone()], &SwitchRule::Anywhere, &tol).unwrap();
        let sa = q_all.samples();
        let sb = q_left.samples();
        assert_eq!(sa.len(), sb.len());
        for (x, y) in sa.iter().zip(sb.iter()) {
            assert!(x.1.dist(y.1) <= tol.match_tol);
        }
    }

    #[test]
    fn mismatched_junction_is_rejected() {
        let tol = Tolerances::default();
        let ens = u_ensemble();
        let gen = PathGenerator::Ensemble(&ens);
        let p1 = find_simple_path(&gen, Point::new(0.1, 0.0), Point::new(0.5, 0.0), &tol).unwrap();
        let p2 = find_simple_path(&gen, Point::new(0.6, 0.0), Point::new(0.2, 0.0), &tol)
            .unwrap()
            .retimed(p1.t1);
        let res = concatenate(&[p1, p2], &SwitchRule::Anywhere, &tol);
        assert!(matches!(res, Err(Error::ConcatenationMismatch { .. })));
    }

    #[test]
    fn forbidden_switch_is_named() {
        let tol = Tolerances::default();
        let ens = u_ensemble();
        let gen = PathGenerator::Ensemble(&ens);
        let a = Point::new(0.25, 0.0);
        let b = Point::new(0.75, 0.0);
        let ab = find_simple_path(&gen, a, b, &tol).unwrap();
        let ba = find_simple_path(&gen, b, a, &tol).unwrap().retimed(ab.t1);
        let rule = SwitchRule::OnlyAt {
            points: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            tol: 1e-6,
        };
        // the junction at (0.75, 0) requires a switch off the declared set
        let res = concatenate(&[ab, ba], &rule, &tol);
        assert!(matches!(res, Err(Error::SwitchForbidden { .. })));
    }
}
