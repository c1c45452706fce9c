//! Plane geometry: points, velocity vectors, and the region types used by the
//! condition checkers (segments, arc chains, filled polygons).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::ops::{Add, Mul, Neg, Sub};

/// A state-space point (x1, x2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

/// A velocity vector (state units per time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Point { x1, x2 }
    }

    pub fn dist(&self, other: Point) -> f64 {
        let dx = self.x1 - other.x1;
        let dy = self.x2 - other.x2;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn lerp(&self, other: Point, w: f64) -> Point {
        Point::new(
            self.x1 + (other.x1 - self.x1) * w,
            self.x2 + (other.x2 - self.x2) * w,
        )
    }
}

impl Vec2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Vec2 { x1, x2 }
    }

    pub fn norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2).sqrt()
    }

    pub fn dot(&self, other: Vec2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add<Vec2> for Point {
    type Output = Point;
    fn add(self, v: Vec2) -> Point {
        Point::new(self.x1 + v.x1, self.x2 + v.x2)
    }
}

impl Sub for Point {
    type Output = Vec2;
    fn sub(self, other: Point) -> Vec2 {
        Vec2::new(self.x1 - other.x1, self.x2 - other.x2)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x1 + other.x1, self.x2 + other.x2)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x1 * s, self.x2 * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x1, -self.x2)
    }
}

/// Distance from `p` to the segment [a, b].
pub fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// A circular arc. Angles are radians measured from the center; the arc is
/// swept from `from_angle` to `to_angle`, clockwise or counterclockwise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Arc {
    pub center: Point,
    pub radius: f64,
    pub from_angle: f64,
    pub to_angle: f64,
    pub clockwise: bool,
}

impl Arc {
    /// Signed sweep magnitude in (0, 2π].
    pub fn sweep(&self) -> f64 {
        let raw = if self.clockwise {
            self.from_angle - self.to_angle
        } else {
            self.to_angle - self.from_angle
        };
        let mut s = raw.rem_euclid(std::f64::consts::TAU);
        if s == 0.0 {
            s = std::f64::consts::TAU;
        }
        s
    }

    pub fn point_at(&self, angle: f64) -> Point {
        Point::new(
            self.center.x1 + self.radius * angle.cos(),
            self.center.x2 + self.radius * angle.sin(),
        )
    }

    pub fn start(&self) -> Point {
        self.point_at(self.from_angle)
    }

    pub fn end(&self) -> Point {
        self.point_at(self.to_angle)
    }

    /// Distance from `p` to the arc (not the full circle).
    pub fn distance(&self, p: Point) -> f64 {
        let v = p - self.center;
        let ang = v.x2.atan2(v.x1);
        let rel = if self.clockwise {
            (self.from_angle - ang).rem_euclid(std::f64::consts::TAU)
        } else {
            (ang - self.from_angle).rem_euclid(std::f64::consts::TAU)
        };
        if rel <= self.sweep() {
            (v.norm() - self.radius).abs()
        } else {
            p.dist(self.start()).min(p.dist(self.end()))
        }
    }

    /// Points along the arc at spacing at most `step` (arc length).
    pub fn sample(&self, step: f64) -> Vec<Point> {
        let len = self.radius * self.sweep();
        let n = ((len / step).ceil() as usize).max(2);
        let dir = if self.clockwise { -1.0 } else { 1.0 };
        (0..=n)
            .map(|i| {
                let a = self.from_angle + dir * self.sweep() * (i as f64) / (n as f64);
                self.point_at(a)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// Filled region bounded by a closed vertex loop.
    Polygon,
    /// One-dimensional polyline (empty interior).
    SegmentChain,
    /// One-dimensional chain of circular arcs (empty interior).
    ArcChain,
}

/// A subset of the plane against which containment and
/// complement-connectivity are decided.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    #[serde(default)]
    pub vertices: Vec<Point>,
    #[serde(default)]
    pub arcs: Vec<Arc>,
    pub tol: f64,
}

/// Grid side of the complement flood fill. The nominal spec resolution
/// (event_tol / 2) is far below feasible raster sizes at desk scale, so the
/// fill uses a fixed cell count with one-cell conservative inflation instead.
pub const COMPLEMENT_RASTER: usize = 512;

impl Region {
    pub fn polygon(vertices: Vec<Point>, tol: f64) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry("polygon needs at least 3 vertices".into()));
        }
        Self::validate(RegionKind::Polygon, vertices, Vec::new(), tol)
    }

    pub fn segment_chain(vertices: Vec<Point>, tol: f64) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Geometry("segment chain needs at least 2 vertices".into()));
        }
        Self::validate(RegionKind::SegmentChain, vertices, Vec::new(), tol)
    }

    pub fn arc_chain(arcs: Vec<Arc>, tol: f64) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::Geometry("arc chain needs at least one arc".into()));
        }
        Self::validate(RegionKind::ArcChain, Vec::new(), arcs, tol)
    }

    fn validate(kind: RegionKind, vertices: Vec<Point>, arcs: Vec<Arc>, tol: f64) -> Result<Self> {
        if !(tol >= 0.0) {
            return Err(Error::Geometry("containment tolerance must be >= 0".into()));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::Geometry("non-finite vertex".into()));
        }
        for a in &arcs {
            if !a.center.is_finite() || !a.radius.is_finite() || a.radius <= 0.0 {
                return Err(Error::Geometry("invalid arc".into()));
            }
        }
        Ok(Region { kind, vertices, arcs, tol })
    }

    /// Distance from `p` to the region boundary (polygon) or to the curve
    /// itself (chains).
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match self.kind {
            RegionKind::Polygon | RegionKind::SegmentChain => {
                let closed = self.kind == RegionKind::Polygon;
                let n = self.vertices.len();
                let mut best = f64::INFINITY;
                let last = if closed { n } else { n - 1 };
                for i in 0..last {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    best = best.min(dist_to_segment(p, a, b));
                }
                best
            }
            RegionKind::ArcChain => self
                .arcs
                .iter()
                .map(|a| a.distance(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Even-odd test against the vertex loop. Only meaningful for polygons.
    pub fn point_in_polygon(&self, p: Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if (a.x2 > p.x2) != (b.x2 > p.x2) {
                let x_cross = a.x1 + (p.x2 - a.x2) / (b.x2 - a.x2) * (b.x1 - a.x1);
                if p.x1 < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// True iff `p` lies within the containment tolerance of the region.
    pub fn contains(&self, p: Point) -> Result<bool> {
        if !p.is_finite() {
            return Err(Error::Geometry("non-finite query point".into()));
        }
        self.check_nonempty()?;
        match self.kind {
            RegionKind::Polygon => {
                Ok(self.point_in_polygon(p) || self.boundary_distance(p) <= self.tol)
            }
            RegionKind::SegmentChain | RegionKind::ArcChain => {
                Ok(self.boundary_distance(p) <= self.tol)
            }
        }
    }

    fn check_nonempty(&self) -> Result<()> {
        let ok = match self.kind {
            RegionKind::Polygon => self.vertices.len() >= 3,
            RegionKind::SegmentChain => self.vertices.len() >= 2,
            RegionKind::ArcChain => !self.arcs.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry("degenerate region".into()))
        }
    }

    /// Bounding box over the geometry (vertices and arc extremes).
    pub fn bbox(&self) -> Result<(Point, Point)> {
        self.check_nonempty()?;
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut grow = |p: Point| {
            lo.x1 = lo.x1.min(p.x1);
            lo.x2 = lo.x2.min(p.x2);
            hi.x1 = hi.x1.max(p.x1);
            hi.x2 = hi.x2.max(p.x2);
        };
        for &v in &self.vertices {
            grow(v);
        }
        for a in &self.arcs {
            for p in a.sample(a.radius * 0.05) {
                grow(p);
            }
        }
        Ok((lo, hi))
    }

    pub fn centroid(&self) -> Result<Point> {
        let (lo, hi) = self.bbox()?;
        Ok(Point::new((lo.x1 + hi.x1) / 2.0, (lo.x2 + hi.x2) / 2.0))
    }

    /// Dense boundary / curve samples at the given spacing.
    pub fn boundary_samples(&self, step: f64) -> Vec<Point> {
        let mut out = Vec::new();
        match self.kind {
            RegionKind::Polygon | RegionKind::SegmentChain => {
                let closed = self.kind == RegionKind::Polygon;
                let n = self.vertices.len();
                let last = if closed { n } else { n - 1 };
                for i in 0..last {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    let len = a.dist(b);
                    let k = ((len / step).ceil() as usize).max(1);
                    for j in 0..k {
                        out.push(a.lerp(b, j as f64 / k as f64));
                    }
                }
                if !closed {
                    out.push(self.vertices[n - 1]);
                }
            }
            RegionKind::ArcChain => {
                for a in &self.arcs {
                    out.extend(a.sample(step));
                }
            }
        }
        out
    }

    pub fn translated(&self, v: Vec2) -> Region {
        let mut r = self.clone();
        for p in &mut r.vertices {
            *p = *p + v;
        }
        for a in &mut r.arcs {
            a.center = a.center + v;
        }
        r
    }

    pub fn rotated(&self, theta: f64, about: Point) -> Region {
        let (s, c) = theta.sin_cos();
        let rot = |p: Point| {
            let d = p - about;
            Point::new(
                about.x1 + c * d.x1 - s * d.x2,
                about.x2 + s * d.x1 + c * d.x2,
            )
        };
        let mut r = self.clone();
        for p in &mut r.vertices {
            *p = rot(*p);
        }
        for a in &mut r.arcs {
            a.center = rot(a.center);
            a.from_angle += theta;
            a.to_angle += theta;
        }
        r
    }

    /// True iff the complement of the region is one connected unbounded set.
    ///
    /// Decided by flood fill on a square box four times the region diameter:
    /// the curve (and polygon interior) blocks cells, the box boundary seeds
    /// the unbounded component, and any unreached free cell witnesses a
    /// bounded pocket.
    pub fn complement_unbounded(&self) -> Result<bool> {
        self.complement_unbounded_with_raster(COMPLEMENT_RASTER)
    }

    pub fn complement_unbounded_with_raster(&self, n: usize) -> Result<bool> {
        let (lo, hi) = self.bbox()?;
        let diam = (hi - lo).norm().max(1e-9);
        let center = Point::new((lo.x1 + hi.x1) / 2.0, (lo.x2 + hi.x2) / 2.0);
        let side = 4.0 * diam;
        let h = side / n as f64;
        let origin = Point::new(center.x1 - side / 2.0, center.x2 - side / 2.0);

        let cell_of = |p: Point| -> Option<(usize, usize)> {
            let i = ((p.x1 - origin.x1) / h).floor() as isize;
            let j = ((p.x2 - origin.x2) / h).floor() as isize;
            if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                None
            } else {
                Some((i as usize, j as usize))
            }
        };

        let mut blocked = vec![false; n * n];
        // Walk the curve densely and block a 3x3 neighbourhood around every
        // sample so the blocked set is 4-connected (no diagonal leaks). The
        // containment tolerance widens thick regions (e.g. annuli).
        let extra = (self.tol / h).ceil() as isize;
        let reach = 1 + extra;
        for p in self.boundary_samples(h / 2.0) {
            if let Some((ci, cj)) = cell_of(p) {
                for di in -reach..=reach {
                    for dj in -reach..=reach {
                        let i = ci as isize + di;
                        let j = cj as isize + dj;
                        if i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n {
                            blocked[i as usize * n + j as usize] = true;
                        }
                    }
                }
            }
        }
        if self.kind == RegionKind::Polygon {
            for i in 0..n {
                for j in 0..n {
                    if blocked[i * n + j] {
                        continue;
                    }
                    let p = Point::new(
                        origin.x1 + (i as f64 + 0.5) * h,
                        origin.x2 + (j as f64 + 0.5) * h,
                    );
                    if self.point_in_polygon(p) {
                        blocked[i * n + j] = true;
                    }
                }
            }
        }

        // Flood the complement from the box boundary.
        let mut seen = vec![false; n * n];
        let mut queue = VecDeque::new();
        for i in 0..n {
            for &j in &[0, n - 1] {
                for &(a, b) in &[(i, j), (j, i)] {
                    let idx = a * n + b;
                    if !blocked[idx] && !seen[idx] {
                        seen[idx] = true;
                        queue.push_back((a, b));
                    }
                }
            }
        }
        while let Some((i, j)) = queue.pop_front() {
            let mut push = |a: isize, b: isize| {
                if a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n {
                    let idx = a as usize * n + b as usize;
                    if !blocked[idx] && !seen[idx] {
                        seen[idx] = true;
                        queue.push_back((a as usize, b as usize));
                    }
                }
            };
            push(i as isize - 1, j as isize);
            push(i as isize + 1, j as isize);
            push(i as isize, j as isize - 1);
            push(i as isize, j as isize + 1);
        }

        Ok((0..n * n).all(|idx| blocked[idx] || seen[idx]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_segment() -> Region {
        Region::segment_chain(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)], 1e-6).unwrap()
    }

    #[test]
    fn segment_contains_midpoint() {
        let u = unit_segment();
        assert!(u.contains(Point::new(0.5, 0.0)).unwrap());
        assert!(!u.contains(Point::new(0.5, 1.0)).unwrap());
    }

    #[test]
    fn contains_is_reflexive_on_vertices() {
        let u = unit_segment();
        for &v in &u.vertices {
            assert!(u.contains(v).unwrap());
        }
        let poly = Region::polygon(
            vec![
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(2.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            1e-6,
        )
        .unwrap();
        for &v in &poly.vertices {
            assert!(poly.contains(v).unwrap());
        }
    }

    #[test]
    fn polygon_contains_centroid() {
        let poly = Region::polygon(
            vec![
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(2.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            1e-6,
        )
        .unwrap();
        assert!(poly.contains(poly.centroid().unwrap()).unwrap());
        assert!(!poly.contains(Point::new(3.0, 0.5)).unwrap());
    }

    #[test]
    fn segment_complement_is_unbounded() {
        assert!(unit_segment().complement_unbounded().unwrap());
    }

    #[test]
    fn annulus_complement_is_disconnected() {
        // circle of radius 1 thickened to the ring 0.7..1.3: the inner disk
        // becomes a second complement component
        let ring = Region::arc_chain(
            vec![Arc {
                center: Point::new(0.0, 0.0),
                radius: 1.0,
                from_angle: 0.0,
                to_angle: std::f64::consts::TAU,
                clockwise: false,
            }],
            0.3,
        )
        .unwrap();
        assert!(!ring.complement_unbounded().unwrap());
    }

    #[test]
    fn closed_loop_traps_a_pocket() {
        // thin closed square curve: interior pocket disconnects the complement
        let sq = Region::polygon(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            1e-6,
        )
        .unwrap();
        // as a filled polygon the complement is fine
        assert!(sq.complement_unbounded().unwrap());
        // as a bare curve the pocket remains
        let curve = Region::segment_chain(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
                Point::new(0.0, 0.0),
            ],
            1e-6,
        )
        .unwrap();
        assert!(!curve.complement_unbounded().unwrap());
    }

    #[test]
    fn complement_check_survives_rigid_motion() {
        let u = unit_segment();
        let moved = u.translated(Vec2::new(3.0, -2.0)).rotated(0.7, Point::new(0.0, 0.0));
        assert!(moved.complement_unbounded().unwrap());
    }

    #[test]
    fn degenerate_region_errors() {
        let r = Region {
            kind: RegionKind::SegmentChain,
            vertices: vec![],
            arcs: vec![],
            tol: 0.0,
        };
        assert!(r.contains(Point::new(0.0, 0.0)).is_err());
        assert!(r.complement_unbounded().is_err());
    }

    #[test]
    fn region_json_round_trip() {
        let u = unit_segment();
        let s = serde_json::to_string(&u).unwrap();
        assert!(s.contains("\"kind\":\"segment_chain\""));
        let back: Region = serde_json::from_str(&s).unwrap();
        assert!(back.contains(Point::new(0.5, 0.0)).unwrap());
    }
}
