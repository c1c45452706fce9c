//! Checkers for the path-richness condition (RS1), the non-dense-solution
//! condition (RS2), and concatenation closure (BV3), plus the alternating
//! witness construction and the fixed-point loop/region construction.
//!
//! The "for every a, b" quantifiers are sampled, never exhausted: the
//! checkers are falsifiers and corroborators, and every report records the
//! seed and sample counts that produced it.

use crate::error::{Error, Result};
use crate::geom::{Point, Region, RegionKind, Vec2};
use crate::inclusion::{BranchField, Inclusion, Tolerances};
use crate::integrate::{integrate_branch, rk4_probe, Segment};
use crate::path::{
    concatenate, find_simple_path, is_simple, PathCurve, PathGenerator, SwitchRule,
};
use crate::solution::{Ensemble, Provenance, SolutionWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceResult {
    pub description: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub seed: u64,
    pub sampled: usize,
    pub pass: bool,
    pub instances: Vec<InstanceResult>,
}

impl ConditionReport {
    fn from_instances(condition: &str, seed: u64, instances: Vec<InstanceResult>) -> Self {
        ConditionReport {
            condition: condition.into(),
            seed,
            sampled: instances.len(),
            pass: !instances.is_empty() && instances.iter().all(|i| i.pass),
            instances,
        }
    }
}

/// Quasi-uniform points over the region geometry: arc-length sampling for
/// curves, rejection sampling for polygon interiors.
pub fn sample_region_points(region: &Region, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut out = Vec::with_capacity(n);
    match region.kind {
        RegionKind::SegmentChain | RegionKind::ArcChain => {
            let samples = region.boundary_samples(1e-3);
            for _ in 0..n {
                out.push(samples[rng.gen_range(0..samples.len())]);
            }
        }
        RegionKind::Polygon => {
            let (lo, hi) = region.bbox().expect("nonempty region");
            let mut tries = 0;
            while out.len() < n && tries < 100_000 {
                tries += 1;
                let p = Point::new(
                    rng.gen_range(lo.x1..hi.x1),
                    rng.gen_range(lo.x2..hi.x2),
                );
                if region.point_in_polygon(p) {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn path_in_region(path: &PathCurve, region: &Region, stride: usize) -> (bool, Option<Point>) {
    let samples = path.samples();
    for (i, &(_, p)) in samples.iter().enumerate() {
        if i % stride != 0 && i != samples.len() - 1 {
            continue;
        }
        if !region.contains(p).unwrap_or(false) {
            return (false, Some(p));
        }
    }
    (true, None)
}

/// Containment slack for path samples: integration chords deviate from the
/// polygonized region boundary at this scale.
fn region_with_path_slack(region: &Region, tol: &Tolerances) -> Region {
    let mut r = region.clone();
    r.tol = r.tol.max(10.0 * tol.match_tol).max(2.0 * tol.integ_step * 1e-2);
    r
}

/// (RS1) For sampled ordered pairs (a, b) of region points there is a
/// simple path from a to b inside the region, generated by the machinery.
/// Forced corner cases put both endpoints, then one endpoint, on the
/// generating loop or curve ends.
pub fn check_rs1(
    generator: &PathGenerator,
    region: &Region,
    n_pairs: usize,
    seed: u64,
    tol: &Tolerances,
) -> ConditionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let check_region = region_with_path_slack(region, tol);
    let mut pairs: Vec<(Point, Point, &'static str)> = Vec::new();

    // forced corner cases
    match generator {
        PathGenerator::Loop { reference, .. } => {
            let samples = reference.samples();
            let pick = |rng: &mut ChaCha8Rng| samples[rng.gen_range(0..samples.len())].1;
            for _ in 0..(n_pairs / 5).max(2) {
                pairs.push((pick(&mut rng), pick(&mut rng), "both endpoints on the loop"));
            }
            let interior = sample_region_points(region, (n_pairs / 5).max(2), &mut rng);
            for p in interior {
                pairs.push((pick(&mut rng), p, "one endpoint on the loop"));
            }
        }
        PathGenerator::Ensemble(_) => {
            let ends: Vec<Point> = match region.kind {
                RegionKind::SegmentChain => vec![
                    *region.vertices.first().unwrap(),
                    *region.vertices.last().unwrap(),
                ],
                RegionKind::ArcChain => {
                    vec![region.arcs[0].start(), region.arcs[0].end()]
                }
                RegionKind::Polygon => Vec::new(),
            };
            if ends.len() == 2 {
                pairs.push((ends[0], ends[1], "curve endpoints forward"));
                pairs.push((ends[1], ends[0], "curve endpoints backward"));
            }
        }
    }
    while pairs.len() < n_pairs {
        let pts = sample_region_points(region, 2, &mut rng);
        if pts.len() == 2 && pts[0].dist(pts[1]) > 10.0 * tol.match_tol {
            pairs.push((pts[0], pts[1], "sampled pair"));
        }
    }

    let instances = pairs
        .into_iter()
        .map(|(a, b, label)| {
            let description = format!(
                "{label}: ({:.4}, {:.4}) -> ({:.4}, {:.4})",
                a.x1, a.x2, b.x1, b.x2
            );
            match find_simple_path(generator, a, b, tol) {
                Ok(path) => {
                    let (simple, diag) = is_simple(&path, tol);
                    let (inside, escape) = path_in_region(&path, &check_region, 5);
                    let pass = simple && inside;
                    let detail = if pass {
                        format!(
                            "duration {:.4}, {} interior switches",
                            path.duration(),
                            diag.interior_switches
                        )
                    } else if !simple {
                        format!("interior endpoint hits at {:?}", diag.endpoint_hits)
                    } else {
                        format!("escaped the region near {:?}", escape)
                    };
                    InstanceResult {
                        description,
                        pass,
                        detail,
                    }
                }
                Err(e) => InstanceResult {
                    description,
                    pass: false,
                    detail: format!("no witness: {e}"),
                },
            }
        })
        .collect();
    ConditionReport::from_instances("RS1", seed, instances)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rs2Witness {
    pub member: usize,
    /// Center of the uncovered relative ball.
    pub center: Point,
    /// Certified ball radius.
    pub radius: f64,
}

/// Resolution of the rasterized coverage test.
pub const RS2_RASTER: f64 = 0.01;

/// Largest ball of region points left uncovered by an image cloud,
/// rasterized at [`RS2_RASTER`]: (center, radius). The ball is intrinsic
/// for curve-like regions (an uncovered sub-arc); for filled polygons the
/// disk must additionally fit inside the region.
pub fn uncovered_ball(region: &Region, image: &[Point]) -> Option<(Point, f64)> {
    let cloud: Vec<Point> = match region.kind {
        RegionKind::Polygon => {
            let (lo, hi) = region.bbox().ok()?;
            let mut pts = Vec::new();
            let mut x = lo.x1;
            while x <= hi.x1 {
                let mut y = lo.x2;
                while y <= hi.x2 {
                    let p = Point::new(x, y);
                    if region.point_in_polygon(p) {
                        pts.push(p);
                    }
                    y += RS2_RASTER;
                }
                x += RS2_RASTER;
            }
            pts
        }
        _ => region.boundary_samples(RS2_RASTER / 2.0),
    };
    let grid = PointGrid::build(image, RS2_RASTER);
    let cap = match region.kind {
        // a disk must fit inside the region, so search wider for polygons
        RegionKind::Polygon => 40.0 * RS2_RASTER,
        _ => 4.0 * RS2_RASTER,
    };
    let mut best: Option<(Point, f64)> = None;
    for &c in &cloud {
        let mut r = grid.min_distance(c, cap) - RS2_RASTER / 2.0;
        if region.kind == RegionKind::Polygon {
            r = r.min(region.boundary_distance(c));
        }
        if best.is_none_or(|(_, br)| r > br) {
            best = Some((c, r));
        }
    }
    best
}

/// (RS2) Some ensemble member stays inside the region while missing a
/// relative ball of it.
pub fn check_rs2(
    region: &Region,
    ensemble: &Ensemble,
    tol: &Tolerances,
) -> (ConditionReport, Option<Rs2Witness>) {
    let check_region = region_with_path_slack(region, tol);
    let min_radius = RS2_RASTER.max(tol.event_tol);

    let mut witness = None;
    let mut instances = Vec::new();
    for (idx, member) in ensemble.members.iter().enumerate() {
        // (a) the member must stay inside the region
        let mut inside = true;
        let mut escape = None;
        for seg in &member.segments {
            for (i, &(_, p)) in seg.samples.iter().enumerate() {
                if i % 7 != 0 {
                    continue;
                }
                if !check_region.contains(p).unwrap_or(false) {
                    inside = false;
                    escape = Some(p);
                    break;
                }
            }
            if !inside {
                break;
            }
        }
        if !inside {
            instances.push(InstanceResult {
                description: format!("member {idx}"),
                pass: false,
                detail: format!("leaves the region near {escape:?}"),
            });
            continue;
        }

        // (b) uncovered relative ball
        let image: Vec<Point> = member
            .segments
            .iter()
            .flat_map(|s| s.samples.iter().map(|&(_, p)| p))
            .collect();
        let Some((center, radius)) = uncovered_ball(region, &image) else {
            continue;
        };
        let pass = radius >= min_radius;
        instances.push(InstanceResult {
            description: format!("member {idx}"),
            pass,
            detail: format!(
                "stays inside; largest uncovered ball r = {radius:.4} at ({:.3}, {:.3})",
                center.x1, center.x2
            ),
        });
        if pass && witness.is_none() {
            witness = Some(Rs2Witness {
                member: idx,
                center,
                radius,
            });
        }
    }

    let mut report = ConditionReport::from_instances("RS2", 0, instances);
    // RS2 is existential: one witness suffices
    report.pass = witness.is_some();
    (report, witness)
}

/// Cell-hashed nearest-distance queries over a point cloud.
struct PointGrid {
    cell: f64,
    map: std::collections::HashMap<(i64, i64), Vec<Point>>,
}

impl PointGrid {
    fn build(points: &[Point], cell: f64) -> Self {
        let mut map: std::collections::HashMap<(i64, i64), Vec<Point>> =
            std::collections::HashMap::new();
        for &p in points {
            let key = ((p.x1 / cell).floor() as i64, (p.x2 / cell).floor() as i64);
            map.entry(key).or_default().push(p);
        }
        PointGrid { cell, map }
    }

    /// Minimum distance from q to the cloud, saturated at `cap`.
    fn min_distance(&self, q: Point, cap: f64) -> f64 {
        let reach = (cap / self.cell).ceil() as i64;
        let ci = (q.x1 / self.cell).floor() as i64;
        let cj = (q.x2 / self.cell).floor() as i64;
        let mut best = cap;
        for di in -reach..=reach {
            for dj in -reach..=reach {
                if let Some(pts) = self.map.get(&(ci + di, cj + dj)) {
                    for p in pts {
                        best = best.min(p.dist(q));
                    }
                }
            }
        }
        best
    }
}

/// (BV3) Random chains of RS1 paths with shared junctions concatenate into
/// single witness solutions, under the declared switching rule. Failures
/// name the junction.
#[allow(clippy::too_many_arguments)]
pub fn check_bv3(
    inc: &Inclusion,
    generator: &PathGenerator,
    region: &Region,
    n_chains: usize,
    max_len: usize,
    seed: u64,
    rule: &SwitchRule,
    tol: &Tolerances,
) -> ConditionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let check_region = region_with_path_slack(region, tol);
    let mut instances = Vec::new();
    for chain_idx in 0..n_chains {
        let len = rng.gen_range(2..=max_len.max(2));
        let mut points = Vec::new();
        while points.len() < len + 1 {
            let pts = sample_region_points(region, 1, &mut rng);
            if let Some(&p) = pts.first() {
                if points
                    .last()
                    .is_none_or(|q: &Point| q.dist(p) > 10.0 * tol.match_tol)
                {
                    points.push(p);
                }
            }
        }
        let description = format!("chain {chain_idx} of {len} paths");
        let mut paths = Vec::new();
        let mut failed = None;
        let mut at = 0.0;
        for w in points.windows(2) {
            match find_simple_path(generator, w[0], w[1], tol) {
                Ok(p) => {
                    let p = p.retimed(at);
                    at = p.t1;
                    paths.push(p);
                }
                Err(e) => {
                    failed = Some(format!("no RS1 path for a link: {e}"));
                    break;
                }
            }
        }
        if let Some(detail) = failed {
            instances.push(InstanceResult {
                description,
                pass: false,
                detail,
            });
            continue;
        }
        match concatenate(&paths, rule, tol) {
            Ok((q, witness)) => {
                let (inside, escape) = path_in_region(&q, &check_region, 7);
                let rep = crate::solution::verify_inclusion(&witness, inc, tol, 1e-3);
                let pass = inside && rep.max_residual <= 1e-3;
                let detail = if pass {
                    let joins = paths
                        .windows(2)
                        .map(|w| {
                            let a = w[0].pieces.last().unwrap().branch;
                            let b = w[1].pieces[0].branch;
                            if a == b { "same-branch" } else { "switch" }
                        })
                        .collect::<Vec<_>>()
                        .join(", ");
                    format!("witness residual {:.2e}; joins: {joins}", rep.max_residual)
                } else if !inside {
                    format!("concatenation escapes the region near {escape:?}")
                } else {
                    format!("witness residual {:.2e}", rep.max_residual)
                };
                instances.push(InstanceResult {
                    description,
                    pass,
                    detail,
                });
            }
            Err(e) => instances.push(InstanceResult {
                description,
                pass: false,
                detail: format!("{e}"),
            }),
        }
    }
    ConditionReport::from_instances("BV3", seed, instances)
}

/// Realize the alternating witness of the (RS1)&(BV3) ⇒ (RS2) argument:
/// k_max rounds of P_ab then P_ba on the exact piecewise timetable
/// w(k·(t_ab+t_ba)) = a, w((k+1)·t_ab + k·t_ba) = b.
pub fn build_alternating_witness(
    p_ab: &PathCurve,
    p_ba: &PathCurve,
    k_max: usize,
    tol: &Tolerances,
) -> Result<SolutionWindow> {
    if p_ab.b.dist(p_ba.a) > tol.match_tol || p_ba.b.dist(p_ab.a) > tol.match_tol {
        return Err(Error::ConcatenationMismatch {
            index: 0,
            gap: p_ab.b.dist(p_ba.a).max(p_ba.b.dist(p_ab.a)),
            at: p_ab.b,
        });
    }
    if k_max == 0 {
        return Err(Error::Parameter("k_max must be at least 1".into()));
    }
    let t_ab = p_ab.duration();
    let t_ba = p_ba.duration();
    let mut segments: Vec<Segment> = Vec::new();
    for k in 0..k_max {
        let base = k as f64 * (t_ab + t_ba);
        for seg in &p_ab.retimed(base).pieces {
            segments.push(seg.clone());
        }
        for seg in &p_ba.retimed(base + t_ab).pieces {
            segments.push(seg.clone());
        }
    }
    SolutionWindow::from_segments(segments, Provenance::Concatenation, tol.match_tol)
}

/// How the inward (branch-1) leg of the fixed-point loop ends.
#[derive(Debug, Clone, Copy)]
pub enum InwardStop {
    /// First return to the ray from the singular point through the anchor
    /// (one full revolution of a spiral sink).
    SectionReturn,
    /// Stop once the distance to the singular point falls to this fraction
    /// of the anchor distance (for sinks whose flow stays on the ray).
    RadiusFraction(f64),
}

#[derive(Debug, Clone)]
pub struct FixedPointLoop {
    /// The simple loop path from the anchor to itself.
    pub p: PathCurve,
    /// Bounded complement components of P together with P itself.
    pub v: Region,
    /// Where the inward leg ended (the jet start).
    pub inward_landing: Point,
    /// Distance between the loop end and the anchor.
    pub closure_gap: f64,
}

/// Construct the loop P and region V around a hyperbolic sink of branch 1:
/// follow branch 1 inward from the anchor, then the branch-2 jet back.
pub fn construct_v_from_fixed_point(
    inc: &Inclusion,
    a_star: Point,
    anchor: Point,
    stop: InwardStop,
    tol: &Tolerances,
) -> Result<FixedPointLoop> {
    if anchor.dist(a_star) <= 100.0 * tol.event_tol {
        return Err(Error::Parameter(
            "the loop anchor must differ from the singular point".into(),
        ));
    }
    let f1 = inc.branch1();
    // generous bound on both legs at desk scale
    let horizon = 100.0;

    let t_inward = match stop {
        InwardStop::SectionReturn => {
            inward_section_return(f1, a_star, anchor, horizon, tol)?
        }
        InwardStop::RadiusFraction(q) => {
            if !(0.0 < q && q < 1.0) {
                return Err(Error::Parameter("radius fraction must be in (0,1)".into()));
            }
            inward_radius_stop(f1, a_star, anchor, q * anchor.dist(a_star), horizon, tol)?
        }
    };
    let inward = integrate_branch(f1, anchor, 0.0, t_inward, tol)?;
    let inward_landing = inward.end_point();

    // jet back to the anchor along branch 2
    let hit = crate::integrate::hit_event(
        inc.branch2(),
        inward_landing,
        &crate::integrate::EventSpec::Point { target: anchor },
        horizon,
        tol,
    )?;
    let jet = integrate_branch(inc.branch2(), inward_landing, t_inward, t_inward + hit.t, tol)?;
    let closure_gap = jet.end_point().dist(anchor);
    if closure_gap > tol.match_tol {
        return Err(Error::LoopClosure {
            gap: closure_gap,
            at: jet.end_point(),
        });
    }

    let p = PathCurve::from_pieces(vec![inward, jet])?;
    let (simple, diag) = is_simple(&p, tol);
    if !simple {
        return Err(Error::Geometry(format!(
            "loop is not simple: interior endpoint hits at {:?}",
            diag.endpoint_hits
        )));
    }
    let min_star_dist = p
        .samples()
        .iter()
        .map(|&(_, q)| q.dist(a_star))
        .fold(f64::INFINITY, f64::min);
    if min_star_dist <= 100.0 * tol.event_tol {
        return Err(Error::Geometry(
            "loop passes through the singular point".into(),
        ));
    }

    // V = bounded components of the complement together with P: a filled
    // polygon when the loop encloses area, the bare curve when degenerate.
    // The polygon is decimated; the containment tolerance absorbs the chord
    // deviation.
    let pts_full: Vec<Point> = p.samples().iter().map(|&(_, q)| q).collect();
    let (mut lo, mut hi) = (pts_full[0], pts_full[0]);
    for q in &pts_full {
        lo = Point::new(lo.x1.min(q.x1), lo.x2.min(q.x2));
        hi = Point::new(hi.x1.max(q.x1), hi.x2.max(q.x2));
    }
    let thickness = (hi.x1 - lo.x1).min(hi.x2 - lo.x2);
    let v = if thickness <= 1e-3 {
        Region::segment_chain(
            vec![Point::new(lo.x1, lo.x2), Point::new(hi.x1, hi.x2)],
            1e-5,
        )?
    } else {
        let stride = (pts_full.len() / 800).max(1);
        let pts: Vec<Point> = pts_full.iter().copied().step_by(stride).collect();
        Region::polygon(pts, 1e-4)?
    };

    Ok(FixedPointLoop {
        p,
        v,
        inward_landing,
        closure_gap,
    })
}

/// Time of first return of the branch-1 flow to the ray through the anchor.
fn inward_section_return(
    f1: &BranchField,
    a_star: Point,
    anchor: Point,
    horizon: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let ray = anchor - a_star;
    let normal = Vec2::new(-ray.x2, ray.x1);
    let s_of = |p: Point| (p - a_star).dot(normal);
    let on_ray_side = |p: Point| (p - a_star).dot(ray) > 0.0;

    let h = tol.integ_step;
    let mut t = 0.0;
    let mut x = anchor;
    let mut armed = false;
    while t < horizon {
        let x_next = rk4_probe(f1, x, h);
        let t_next = t + h;
        let (s0, s1) = (s_of(x), s_of(x_next));
        if !armed && s1.abs() > 10.0 * tol.event_tol {
            armed = true;
        }
        if armed && s0 != 0.0 && (s0 > 0.0) != (s1 > 0.0) && on_ray_side(x) {
            // bisection on the sign change
            let (mut lo_t, mut hi_t) = (t, t_next);
            let mut x_lo = x;
            for _ in 0..60 {
                if hi_t - lo_t < 1e-14 {
                    break;
                }
                let mid = 0.5 * (lo_t + hi_t);
                let xm = rk4_probe(f1, x_lo, mid - lo_t);
                if (s_of(xm) > 0.0) == (s0 > 0.0) {
                    lo_t = mid;
                    x_lo = xm;
                } else {
                    hi_t = mid;
                }
            }
            return Ok(0.5 * (lo_t + hi_t));
        }
        t = t_next;
        x = x_next;
    }
    Err(Error::NoEvent {
        t_max: horizon,
        closest: f64::NAN,
    })
}

/// Time at which the branch-1 flow first comes within `radius` of the
/// singular point.
fn inward_radius_stop(
    f1: &BranchField,
    a_star: Point,
    anchor: Point,
    radius: f64,
    horizon: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let h = tol.integ_step;
    let mut t = 0.0;
    let mut x = anchor;
    while t < horizon {
        let x_next = rk4_probe(f1, x, h);
        let t_next = t + h;
        let (d0, d1) = (x.dist(a_star), x_next.dist(a_star));
        if d0 > radius && d1 <= radius {
            let (mut lo_t, mut hi_t) = (t, t_next);
            let mut x_lo = x;
            for _ in 0..60 {
                if hi_t - lo_t < 1e-14 {
                    break;
                }
                let mid = 0.5 * (lo_t + hi_t);
                let xm = rk4_probe(f1, x_lo, mid - lo_t);
                if xm.dist(a_star) > radius {
                    lo_t = mid;
                    x_lo = xm;
                } else {
                    hi_t = mid;
                }
            }
            return Ok(0.5 * (lo_t + hi_t));
        }
        t = t_next;
        x = x_next;
    }
    Err(Error::NoEvent {
        t_max: horizon,
        closest: f64::NAN,
    })
}
