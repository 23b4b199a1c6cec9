//! Intersections of congruent balls ("spherical polytopes"): boundary
//! structure, vertical projections into planar maps, and the point / line /
//! plane emptiness queries with witness-ball certificates.

use std::borrow::Borrow;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    sphere_sphere_intersect, Arc3, Ball, Circle3, Direction, Point3, SphereContact, Tolerance,
};
use crate::miniball::{balls_intersection_status, seb_of_subset, IntersectionStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyVertex {
    pub point: Point3,
    /// Balls whose boundary passes through the vertex.
    pub balls: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyEdge {
    pub arc: Arc3,
    pub balls: (usize, usize),
    /// Endpoint vertex ids; `None` for a closed circular edge.
    pub ends: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFace {
    pub ball: usize,
    /// Boundary cycles as edge ids. A face of a congruent-ball intersection
    /// is spherically convex, so there is at most one cycle.
    pub cycles: Vec<Vec<usize>>,
    /// Zero-area face of a single-point intersection.
    pub degenerate: bool,
}

/// Boundary structure of a nonempty intersection of equal-radius balls.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalPolytope {
    pub radius: f64,
    pub balls: Vec<Ball>,
    pub vertices: Vec<PolyVertex>,
    pub edges: Vec<PolyEdge>,
    pub faces: Vec<PolyFace>,
    /// Set when the intersection is a single point.
    pub degenerate: Option<Point3>,
    pub upper: PlanarMap,
    pub lower: PlanarMap,
}

impl SphericalPolytope {
    pub fn centers(&self) -> Vec<Point3> {
        self.balls.iter().map(|b| b.center).collect()
    }

    pub fn contains(&self, p: Point3, tol: &Tolerance) -> bool {
        self.balls.iter().all(|b| b.contains(p, tol))
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }
}

/// Allowed angular sub-arcs of a circle under constraints `A cos θ + B sin θ ≤ C`.
#[derive(Debug, Clone)]
pub(crate) struct CircleClip {
    // disjoint sorted intervals inside [0, 2π]
    parts: Vec<(f64, f64)>,
}

impl CircleClip {
    pub fn full() -> Self {
        CircleClip {
            parts: vec![(0.0, TAU)],
        }
    }

    pub fn restrict(&mut self, a: f64, b: f64, c: f64) {
        if self.parts.is_empty() {
            return;
        }
        let rr = a.hypot(b);
        if rr <= 1e-300 || c >= rr {
            if c < 0.0 && rr <= 1e-300 {
                self.parts.clear();
            }
            return;
        }
        if c <= -rr {
            self.parts.clear();
            return;
        }
        let phi = b.atan2(a);
        let h = (c / rr).acos();
        let start = (phi + h).rem_euclid(TAU);
        let len = TAU - 2.0 * h;
        let allowed: Vec<(f64, f64)> = if start + len <= TAU {
            vec![(start, start + len)]
        } else {
            vec![(0.0, start + len - TAU), (start, TAU)]
        };
        let mut out = Vec::new();
        for &(p0, p1) in &self.parts {
            for &(q0, q1) in &allowed {
                let lo = p0.max(q0);
                let hi = p1.min(q1);
                if hi > lo {
                    out.push((lo, hi));
                }
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        self.parts = out;
    }

    /// Restricts the circle to the ball `b` (points within `b.radius` of its center).
    pub fn restrict_to_ball(&mut self, circle: &Circle3, b: &Ball) {
        let (u, v) = circle.axes();
        let d = circle.center - b.center;
        let rho = circle.radius;
        self.restrict(
            2.0 * rho * d.dot(u),
            2.0 * rho * d.dot(v),
            b.radius * b.radius - d.norm2() - rho * rho,
        );
    }

    /// Restricts to the halfspace `m·p ≤ h`.
    pub fn restrict_to_halfspace(&mut self, circle: &Circle3, m: Point3, h: f64) {
        let (u, v) = circle.axes();
        let rho = circle.radius;
        self.restrict(rho * m.dot(u), rho * m.dot(v), h - m.dot(circle.center));
    }

    /// Allowed arcs as `(θ0, θ1)` with `θ0 < θ1`, `θ1` possibly above `2π`
    /// when an arc wraps through angle zero.
    pub fn arcs(&self, min_len: f64) -> Vec<(f64, f64)> {
        let mut parts = self.parts.clone();
        if parts.len() >= 2 {
            let first = parts[0];
            let last = parts[parts.len() - 1];
            if first.0 <= 0.0 && last.1 >= TAU {
                parts.pop();
                parts[0] = (last.0, first.1 + TAU);
            }
        }
        parts
            .into_iter()
            .filter(|&(a, b)| b - a > min_len)
            .collect()
    }
}

fn dedup_balls(balls: &[Ball], tol: &Tolerance) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::new();
    for (i, b) in balls.iter().enumerate() {
        let scale = b.radius.max(b.center.max_abs());
        if !keep
            .iter()
            .any(|&k| balls[k].center.dist(b.center) <= tol.slack(scale))
        {
            keep.push(i);
        }
    }
    keep
}

/// Builds the boundary structure of `∩ balls`; `None` when it is empty.
pub fn build_polytope(balls: &[Ball], tol: &Tolerance) -> Result<Option<SphericalPolytope>> {
    if balls.is_empty() {
        return Err(Error::EmptyInput);
    }
    let r = balls[0].radius;
    if balls.iter().any(|b| !tol.eq(b.radius, r)) {
        return Err(Error::MixedRadii);
    }
    let centers: Vec<Point3> = balls.iter().map(|b| b.center).collect();
    let status = balls_intersection_status(&centers, r, tol);
    let w = match status {
        IntersectionStatus::Empty => return Ok(None),
        IntersectionStatus::Degenerate(w) => Some(w),
        IntersectionStatus::FullDim(_) => None,
    };
    if let Some(w) = w {
        let on: Vec<usize> = (0..balls.len())
            .filter(|&i| (balls[i].center.dist(w) - r).abs() <= 4.0 * tol.slack(r))
            .collect();
        let faces = on
            .iter()
            .map(|&i| PolyFace {
                ball: i,
                cycles: Vec::new(),
                degenerate: true,
            })
            .collect();
        return Ok(Some(SphericalPolytope {
            radius: r,
            balls: balls.to_vec(),
            vertices: vec![PolyVertex {
                point: w,
                balls: on,
            }],
            edges: Vec::new(),
            faces,
            degenerate: Some(w),
            upper: PlanarMap::empty(true),
            lower: PlanarMap::empty(false),
        }));
    }

    let live = dedup_balls(balls, tol);
    let min_len = 1e-12;
    let vertex_eps = 1e-7 * r.max(1e-300);
    let mut vertices: Vec<PolyVertex> = Vec::new();
    let mut edges: Vec<PolyEdge> = Vec::new();
    let vertex_id = |p: Point3, vertices: &mut Vec<PolyVertex>| -> usize {
        if let Some(k) = vertices.iter().position(|v| v.point.dist(p) <= vertex_eps) {
            return k;
        }
        let on = live
            .iter()
            .copied()
            .filter(|&i| (balls[i].center.dist(p) - r).abs() <= vertex_eps)
            .collect();
        vertices.push(PolyVertex {
            point: p,
            balls: on,
        });
        vertices.len() - 1
    };
    for (a, &i) in live.iter().enumerate() {
        for &j in &live[a + 1..] {
            let circle = match sphere_sphere_intersect(&balls[i], &balls[j], tol)? {
                SphereContact::Circle(c) => c,
                _ => continue,
            };
            let mut clip = CircleClip::full();
            for &k in &live {
                if k != i && k != j {
                    clip.restrict_to_ball(&circle, &balls[k]);
                }
            }
            for (t0, t1) in clip.arcs(min_len) {
                let arc = Arc3::new(circle, t0, t1);
                let ends = if arc.is_full() {
                    None
                } else {
                    let s = vertex_id(arc.start(), &mut vertices);
                    let e = vertex_id(arc.end(), &mut vertices);
                    Some((s, e))
                };
                edges.push(PolyEdge {
                    arc,
                    balls: (i, j),
                    ends,
                });
            }
        }
    }

    let mut faces = Vec::new();
    if live.len() == 1 {
        faces.push(PolyFace {
            ball: live[0],
            cycles: vec![Vec::new()],
            degenerate: false,
        });
    } else {
        for &i in &live {
            let mine: Vec<usize> = (0..edges.len())
                .filter(|&e| edges[e].balls.0 == i || edges[e].balls.1 == i)
                .collect();
            if mine.is_empty() {
                continue;
            }
            let cycles = chain_cycles(&mine, &edges);
            debug_assert!(
                cycles.len() == 1,
                "ball {i} contributes {} boundary cycles",
                cycles.len()
            );
            faces.push(PolyFace {
                ball: i,
                cycles,
                degenerate: false,
            });
        }
    }

    let mut poly = SphericalPolytope {
        radius: r,
        balls: balls.to_vec(),
        vertices,
        edges,
        faces,
        degenerate: None,
        upper: PlanarMap::empty(true),
        lower: PlanarMap::empty(false),
    };
    let (up, lo) = project_maps(&poly, tol);
    poly.upper = up;
    poly.lower = lo;
    Ok(Some(poly))
}

// Groups a face's edges into cycles by shared endpoints.
fn chain_cycles(ids: &[usize], edges: &[PolyEdge]) -> Vec<Vec<usize>> {
    let mut used = vec![false; ids.len()];
    let mut cycles = Vec::new();
    for s in 0..ids.len() {
        if used[s] {
            continue;
        }
        used[s] = true;
        let mut cyc = vec![ids[s]];
        let Some((first, mut cur)) = edges[ids[s]].ends else {
            cycles.push(cyc);
            continue;
        };
        while cur != first {
            let next = (0..ids.len()).find(|&t| {
                !used[t]
                    && edges[ids[t]]
                        .ends
                        .is_some_and(|(a, b)| a == cur || b == cur)
            });
            let Some(t) = next else { break };
            used[t] = true;
            cyc.push(ids[t]);
            let (a, b) = edges[ids[t]].ends.unwrap();
            cur = if a == cur { b } else { a };
        }
        cycles.push(cyc);
    }
    cycles
}

/// Label of a planar-map face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceLabel {
    Ball(usize),
    Outside,
}

/// x-monotone piece of a projected circular arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonoPiece {
    pub circle: Circle3,
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl MonoPiece {
    fn point(&self, t: f64) -> Point3 {
        self.circle.point_at(t)
    }

    /// y-coordinate of the projected piece above abscissa `x`.
    pub fn y_at(&self, x: f64) -> f64 {
        let (u, v) = self.circle.axes();
        let rho = self.circle.radius;
        let a = rho * u.x;
        let b = rho * v.x;
        let rr = a.hypot(b);
        let phi = b.atan2(a);
        let s = ((x - self.circle.center.x) / rr).clamp(-1.0, 1.0).acos();
        let mid = 0.5 * (self.t0 + self.t1);
        let mut best = mid;
        let mut best_d = f64::INFINITY;
        for cand in [phi + s, phi - s] {
            // bring the candidate next to the piece's angular range
            let c = cand + TAU * ((mid - cand) / TAU).round();
            let d = if c < self.t0 {
                self.t0 - c
            } else if c > self.t1 {
                c - self.t1
            } else {
                0.0
            };
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        self.point(best.clamp(self.t0, self.t1)).y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    /// Piece ids sorted by y inside the slab.
    pub pieces: Vec<usize>,
    /// `pieces.len() + 1` labels, bottom to top.
    pub labels: Vec<FaceLabel>,
}

/// Slab decomposition of one vertical projection of a spherical polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarMap {
    pub upper: bool,
    pub pieces: Vec<MonoPiece>,
    pub xs: Vec<f64>,
    pub slabs: Vec<Slab>,
}

impl PlanarMap {
    pub fn empty(upper: bool) -> Self {
        PlanarMap {
            upper,
            pieces: Vec::new(),
            xs: Vec::new(),
            slabs: Vec::new(),
        }
    }

    /// Face containing `(x, y)`.
    pub fn locate(&self, x: f64, y: f64) -> FaceLabel {
        if self.xs.len() < 2 || x < self.xs[0] || x > self.xs[self.xs.len() - 1] {
            return FaceLabel::Outside;
        }
        let k = self
            .xs
            .partition_point(|&b| b <= x)
            .clamp(1, self.xs.len() - 1)
            - 1;
        let slab = &self.slabs[k];
        let below = slab.pieces.partition_point(|&p| self.pieces[p].y_at(x) < y);
        slab.labels[below]
    }

    pub fn face_count(&self) -> usize {
        let mut seen: Vec<usize> = self
            .slabs
            .iter()
            .flat_map(|s| s.labels.iter())
            .filter_map(|l| match l {
                FaceLabel::Ball(b) => Some(*b),
                FaceLabel::Outside => None,
            })
            .collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Height of the upper (lower) boundary of `∩ balls` above `(x, y)`, with the
/// ball attaining it; `None` outside some ball's disk.
pub(crate) fn envelope(balls: &[Ball], x: f64, y: f64, upper: bool) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, b) in balls.iter().enumerate() {
        let dx = x - b.center.x;
        let dy = y - b.center.y;
        let s = b.radius * b.radius - dx * dx - dy * dy;
        if s < -1e-12 * b.radius * b.radius {
            return None;
        }
        let w = s.max(0.0).sqrt();
        let z = if upper {
            b.center.z + w
        } else {
            b.center.z - w
        };
        let better = match best {
            None => true,
            Some((bz, _)) => (upper && z < bz) || (!upper && z > bz),
        };
        if better {
            best = Some((z, i));
        }
    }
    best
}

// Splits arc angles at the x-extremes and the given z-levels.
fn split_angles(circle: &Circle3, t0: f64, t1: f64, z_levels: &[f64]) -> Vec<f64> {
    let (u, v) = circle.axes();
    let rho = circle.radius;
    let mut cuts = vec![t0, t1];
    let mut add_periodic = |base: f64| {
        let k0 = ((t0 - base) / TAU).floor() as i64;
        for k in k0..=k0 + 2 {
            let t = base + k as f64 * TAU;
            if t > t0 && t < t1 {
                cuts.push(t);
            }
        }
    };
    let phi_x = (rho * v.x).atan2(rho * u.x);
    add_periodic(phi_x);
    add_periodic(phi_x + PI);
    let (a, b) = (rho * u.z, rho * v.z);
    let rr = a.hypot(b);
    if rr > 1e-14 * rho {
        let phi_z = b.atan2(a);
        for &zl in z_levels {
            let c = (zl - circle.center.z) / rr;
            if c.abs() < 1.0 {
                let s = c.acos();
                add_periodic(phi_z + s);
                add_periodic(phi_z - s);
            }
        }
    }
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    cuts
}

/// Projects the upper and lower boundary of `S` onto the xy-plane.
pub fn project_maps(s: &SphericalPolytope, tol: &Tolerance) -> (PlanarMap, PlanarMap) {
    if s.degenerate.is_some() {
        return (PlanarMap::empty(true), PlanarMap::empty(false));
    }
    let r = s.radius;
    // (circle, t0, t1, z-levels splitting upper/lower, in_upper_rule)
    let mut arcs: Vec<(Circle3, f64, f64, Vec<f64>, Option<(f64, f64)>)> = Vec::new();
    for e in &s.edges {
        let (i, j) = e.balls;
        let zi = s.balls[i].center.z;
        let zj = s.balls[j].center.z;
        arcs.push((
            e.arc.circle,
            e.arc.theta0,
            e.arc.theta1,
            vec![zi, zj],
            Some((zi.min(zj), zi.max(zj))),
        ));
    }
    let live = dedup_balls(&s.balls, tol);
    for &i in &live {
        let eq = Circle3 {
            center: s.balls[i].center,
            radius: r,
            normal: Direction::Z,
        };
        let mut clip = CircleClip::full();
        for &k in &live {
            if k != i {
                clip.restrict_to_ball(&eq, &s.balls[k]);
            }
        }
        for (t0, t1) in clip.arcs(1e-12) {
            arcs.push((eq, t0, t1, Vec::new(), None));
        }
    }

    let scale = r.max(
        s.balls
            .iter()
            .map(|b| b.center.max_abs())
            .fold(0.0, f64::max),
    );
    let xeps = 1e-12 * scale;
    let mut upper_pieces = Vec::new();
    let mut lower_pieces = Vec::new();
    let mut extra_x = Vec::new();
    for (circle, t0, t1, zl, rule) in arcs {
        let cuts = split_angles(&circle, t0, t1, &zl);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a < 1e-13 {
                continue;
            }
            let pa = circle.point_at(a);
            let pb = circle.point_at(b);
            let mid = circle.point_at(0.5 * (a + b));
            let (in_up, in_lo) = match rule {
                None => (true, true),
                Some((zmin, zmax)) => (mid.z >= zmin, mid.z <= zmax),
            };
            if (pa.x - pb.x).abs() <= xeps {
                extra_x.push(pa.x);
                continue;
            }
            let piece = MonoPiece {
                circle,
                t0: a,
                t1: b,
                x0: pa.x.min(pb.x),
                x1: pa.x.max(pb.x),
            };
            if in_up {
                upper_pieces.push(piece);
            }
            if in_lo {
                lower_pieces.push(piece);
            }
        }
    }
    (
        assemble_map(true, upper_pieces, &extra_x, &s.balls, xeps),
        assemble_map(false, lower_pieces, &extra_x, &s.balls, xeps),
    )
}

fn assemble_map(
    upper: bool,
    pieces: Vec<MonoPiece>,
    extra_x: &[f64],
    balls: &[Ball],
    xeps: f64,
) -> PlanarMap {
    let mut xs: Vec<f64> = pieces
        .iter()
        .flat_map(|p| [p.x0, p.x1])
        .chain(extra_x.iter().copied())
        .collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup_by(|a, b| (*a - *b).abs() <= xeps);
    let mut slabs = Vec::new();
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        let xm = 0.5 * (xa + xb);
        let mut ids: Vec<(f64, usize)> = pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.x0 <= xa + xeps && p.x1 >= xb - xeps)
            .map(|(k, p)| (p.y_at(xm), k))
            .collect();
        ids.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut labels = Vec::with_capacity(ids.len() + 1);
        labels.push(FaceLabel::Outside);
        for win in ids.windows(2) {
            let ym = 0.5 * (win[0].0 + win[1].0);
            labels.push(match envelope(balls, xm, ym, upper) {
                Some((_, b)) => FaceLabel::Ball(b),
                None => FaceLabel::Outside,
            });
        }
        if !ids.is_empty() {
            labels.push(FaceLabel::Outside);
        }
        slabs.push(Slab {
            pieces: ids.into_iter().map(|(_, k)| k).collect(),
            labels,
        });
    }
    PlanarMap {
        upper,
        pieces,
        xs,
        slabs,
    }
}

/// Balls `(polytope index, ball index)` whose intersection excludes the
/// queried point, line or plane.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WitnessSet {
    pub refs: Vec<(usize, usize)>,
}

impl WitnessSet {
    fn from_refs(mut refs: Vec<(usize, usize)>) -> Self {
        refs.sort_unstable();
        refs.dedup();
        WitnessSet { refs }
    }

    pub fn balls<P: Borrow<SphericalPolytope>>(&self, polys: &[P]) -> Vec<Ball> {
        self.refs
            .iter()
            .map(|&(j, i)| polys[j].borrow().balls[i])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointQuery {
    Inside(Point3),
    Boundary(Point3),
    Empty(WitnessSet),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    PlusX,
    MinusX,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LineQuery {
    Hit(Point3),
    /// The intersection projects entirely to `side` of the line.
    Empty {
        side: Side,
        witness: WitnessSet,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlaneQuery {
    Witness { point: Point3, degenerate: bool },
    Empty(WitnessSet),
}

fn flatten<P: Borrow<SphericalPolytope>>(polys: &[P]) -> (Vec<Ball>, Vec<(usize, usize)>) {
    let mut balls = Vec::new();
    let mut refs = Vec::new();
    for (j, p) in polys.iter().enumerate() {
        for (i, b) in p.borrow().balls.iter().enumerate() {
            balls.push(*b);
            refs.push((j, i));
        }
    }
    (balls, refs)
}

fn common_radius(balls: &[Ball]) -> f64 {
    balls.iter().map(|b| b.radius).fold(0.0, f64::max)
}

// vertical chord of one ball above (x, y): (bottom, top), or None off its disk
fn chord(b: &Ball, x: f64, y: f64, slack: f64) -> Option<(f64, f64)> {
    let dx = x - b.center.x;
    let dy = y - b.center.y;
    let s = b.radius * b.radius - dx * dx - dy * dy;
    if s < -2.0 * slack * b.radius {
        return None;
    }
    let w = s.max(0.0).sqrt();
    Some((b.center.z - w, b.center.z + w))
}

/// Answers whether the vertical line over `q` meets the common intersection.
pub fn pi0_point_query<P: Borrow<SphericalPolytope>>(
    polys: &[P],
    q: (f64, f64),
    tol: &Tolerance,
) -> PointQuery {
    let (x, y) = q;
    let mut lo = (f64::NEG_INFINITY, (usize::MAX, usize::MAX));
    let mut hi = (f64::INFINITY, (usize::MAX, usize::MAX));
    for (j, p) in polys.iter().enumerate() {
        let p = p.borrow();
        let slack = tol.slack(p.radius);
        let located = match (p.upper.locate(x, y), p.lower.locate(x, y)) {
            (FaceLabel::Ball(a), FaceLabel::Ball(b)) if p.degenerate.is_none() => {
                match (
                    chord(&p.balls[a], x, y, slack),
                    chord(&p.balls[b], x, y, slack),
                ) {
                    (Some((_, top)), Some((bot, _))) => Some(((bot, b), (top, a))),
                    _ => None,
                }
            }
            _ => None,
        };
        let ((bot, bi), (top, ti)) = match located {
            Some(v) => v,
            None => {
                // outside the projection (or on a degenerate polytope): scan the balls
                let mut best_lo = (f64::NEG_INFINITY, 0);
                let mut best_hi = (f64::INFINITY, 0);
                for (i, b) in p.balls.iter().enumerate() {
                    let Some((b0, b1)) = chord(b, x, y, slack) else {
                        return PointQuery::Empty(WitnessSet::from_refs(vec![(j, i)]));
                    };
                    if b0 > best_lo.0 {
                        best_lo = (b0, i);
                    }
                    if b1 < best_hi.0 {
                        best_hi = (b1, i);
                    }
                }
                (best_lo, best_hi)
            }
        };
        if bot > lo.0 {
            lo = (bot, (j, bi));
        }
        if top < hi.0 {
            hi = (top, (j, ti));
        }
    }
    let r = polys.iter().map(|p| p.borrow().radius).fold(0.0, f64::max);
    let len = hi.0 - lo.0;
    let slack = tol.slack(r);
    let mid = Point3::new(x, y, 0.5 * (lo.0 + hi.0));
    if len > slack {
        PointQuery::Inside(mid)
    } else if len >= -slack {
        PointQuery::Boundary(mid)
    } else {
        PointQuery::Empty(WitnessSet::from_refs(vec![lo.1, hi.1]))
    }
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
pub(crate) fn golden_max(a: f64, b: f64, mut f: impl FnMut(f64) -> f64, x_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if b - a <= x_tol {
        let m = 0.5 * (a + b);
        return (m, f(m));
    }
    let (fa, fb) = (f(a), f(b));
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= x_tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if fa > best.1 {
        best = (a, fa);
    }
    if fb > best.1 {
        best = (b, fb);
    }
    best
}

/// Intersection of the balls with the vertical plane `x = x0`, reduced to a
/// one-dimensional concave maximization of the vertical thickness.
struct Section<'a> {
    balls: &'a [Ball],
    slack: f64,
    x_tol: f64,
}

enum Domain {
    /// Ball misses the plane entirely.
    Miss(usize),
    /// y-interval `[lo, hi]` of the common disk slice.
    Span { lo: f64, hi: f64 },
}

impl<'a> Section<'a> {
    fn new(balls: &'a [Ball], tol: &Tolerance) -> Self {
        let r = common_radius(balls);
        let scale = r.max(balls.iter().map(|b| b.center.max_abs()).fold(0.0, f64::max));
        Section {
            balls,
            slack: tol.slack(r),
            x_tol: 1e-13 * scale.max(1e-300),
        }
    }

    fn domain(&self, x: f64) -> Domain {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (i, b) in self.balls.iter().enumerate() {
            let dx = x - b.center.x;
            let s = b.radius * b.radius - dx * dx;
            if s < -2.0 * self.slack * b.radius {
                return Domain::Miss(i);
            }
            let w = s.max(0.0).sqrt();
            lo = lo.max(b.center.y - w);
            hi = hi.min(b.center.y + w);
        }
        Domain::Span { lo, hi }
    }

    // (thickness, bottom, top) of the vertical chord through (x, y)
    fn thickness(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let mut bot = f64::NEG_INFINITY;
        let mut top = f64::INFINITY;
        for b in self.balls {
            let dx = x - b.center.x;
            let dy = y - b.center.y;
            let w = (b.radius * b.radius - dx * dx - dy * dy).max(0.0).sqrt();
            bot = bot.max(b.center.z - w);
            top = top.min(b.center.z + w);
        }
        (top - bot, bot, top)
    }

    /// Maximum thickness over the slice and the point realizing it.
    fn best(&self, x: f64) -> Option<(f64, Point3)> {
        match self.domain(x) {
            Domain::Miss(_) => None,
            Domain::Span { lo, hi, .. } => {
                if lo > hi + 2.0 * self.slack {
                    return None;
                }
                let (a, b) = if lo <= hi {
                    (lo, hi)
                } else {
                    (0.5 * (lo + hi), 0.5 * (lo + hi))
                };
                let (y, g) = golden_max(a, b, |y| self.thickness(x, y).0, self.x_tol);
                let (_, bot, top) = self.thickness(x, y);
                Some((g, Point3::new(x, y, 0.5 * (bot + top))))
            }
        }
    }

    fn meets(&self, x: f64) -> Option<Point3> {
        self.best(x)
            .filter(|(g, _)| *g >= -self.slack)
            .map(|(_, p)| p)
    }

    /// Quasi-concave surrogate: thickness where the slice is nonempty, a
    /// penalty growing with the slice gap elsewhere.
    fn psi(&self, x: f64, big: f64) -> (f64, Point3) {
        match self.domain(x) {
            Domain::Miss(i) => {
                let b = &self.balls[i];
                let over = (x - b.center.x).abs() - b.radius;
                (-(2.0 * big + over), Point3::new(x, b.center.y, b.center.z))
            }
            Domain::Span { lo, hi, .. } if lo > hi => {
                let y = 0.5 * (lo + hi);
                let (_, bot, top) = self.thickness(x, y);
                (-(big + lo - hi), Point3::new(x, y, 0.5 * (bot + top)))
            }
            Domain::Span { .. } => self.best(x).expect("nonempty slice"),
        }
    }
}

/// Answers whether the projection of the common intersection meets the
/// line `x = x0`.
pub fn pi1_line_query<P: Borrow<SphericalPolytope>>(
    polys: &[P],
    x0: f64,
    tol: &Tolerance,
) -> LineQuery {
    let (balls, refs) = flatten(polys);
    if balls.is_empty() {
        return LineQuery::Hit(Point3::new(x0, 0.0, 0.0));
    }
    let sec = Section::new(&balls, tol);
    if let Some(p) = sec.meets(x0) {
        return LineQuery::Hit(p);
    }
    // shrink greedily to a minimal subfamily still missing the plane
    let mut keep: Vec<usize> = (0..balls.len()).collect();
    let mut k = keep.len();
    while k > 0 {
        k -= 1;
        let trial: Vec<Ball> = keep
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != k)
            .map(|(_, &i)| balls[i])
            .collect();
        if !trial.is_empty() && Section::new(&trial, tol).meets(x0).is_none() {
            keep.remove(k);
        }
    }
    let centers: Vec<Point3> = keep.iter().map(|&i| balls[i].center).collect();
    let idx: Vec<usize> = (0..centers.len()).collect();
    let c = seb_of_subset(&centers, &idx)
        .expect("nonempty witness")
        .center;
    let side = if c.x >= x0 { Side::PlusX } else { Side::MinusX };
    LineQuery::Empty {
        side,
        witness: WitnessSet::from_refs(keep.iter().map(|&i| refs[i]).collect()),
    }
}

/// Decides whether the common intersection of all polytopes is nonempty,
/// and whether it is a single point.
pub fn pi2_emptiness<P: Borrow<SphericalPolytope>>(polys: &[P], tol: &Tolerance) -> PlaneQuery {
    let (balls, refs) = flatten(polys);
    if balls.is_empty() {
        return PlaneQuery::Witness {
            point: Point3::ORIGIN,
            degenerate: false,
        };
    }
    let r = common_radius(&balls);
    let slack = tol.slack(r);
    let mut xlo = (f64::NEG_INFINITY, 0);
    let mut xhi = (f64::INFINITY, 0);
    for (i, b) in balls.iter().enumerate() {
        if b.center.x - b.radius > xlo.0 {
            xlo = (b.center.x - b.radius, i);
        }
        if b.center.x + b.radius < xhi.0 {
            xhi = (b.center.x + b.radius, i);
        }
    }
    if xlo.0 > xhi.0 + slack {
        return PlaneQuery::Empty(WitnessSet::from_refs(vec![refs[xlo.1], refs[xhi.1]]));
    }
    let (mut a, mut b) = if xlo.0 <= xhi.0 {
        (xlo.0, xhi.0)
    } else {
        (0.5 * (xlo.0 + xhi.0), 0.5 * (xlo.0 + xhi.0))
    };
    let sec = Section::new(&balls, tol);
    let zspan = balls
        .iter()
        .map(|b| b.center.z)
        .fold(f64::NEG_INFINITY, f64::max)
        - balls
            .iter()
            .map(|b| b.center.z)
            .fold(f64::INFINITY, f64::min);
    let big = zspan + 3.0 * r + 1.0;
    // a chord this thick certifies a margin well above the tolerance
    let clear = 10.0 * (8.0 * r * slack).sqrt();

    // narrow to one slab of the projected maps by binary search on slab boundaries
    let mut cuts: Vec<f64> = polys
        .iter()
        .flat_map(|p| {
            let p = p.borrow();
            p.upper
                .xs
                .iter()
                .chain(p.lower.xs.iter())
                .copied()
                .collect::<Vec<_>>()
        })
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let h = 1e-7 * (b - a).max(r);
    let mut best: Option<(f64, Point3)> = None;
    let (mut i0, mut i1) = (0usize, cuts.len());
    while i0 < i1 {
        let m = (i0 + i1) / 2;
        let x = cuts[m];
        let v = sec.psi(x, big);
        if best.map_or(true, |bv| v.0 > bv.0) {
            best = Some(v);
        }
        if v.0 >= clear {
            break;
        }
        let left = sec.psi((x - h).max(a), big).0;
        let right = sec.psi((x + h).min(b), big).0;
        if right > left {
            a = x;
            i0 = m + 1;
        } else {
            b = x;
            i1 = m;
        }
    }
    if best.map_or(true, |bv| bv.0 < clear) {
        let (x, _) = golden_max(a, b, |x| sec.psi(x, big).0, sec.x_tol);
        let v = sec.psi(x, big);
        if best.map_or(true, |bv| v.0 > bv.0) {
            best = Some(v);
        }
    }
    let (g, w) = best.expect("search evaluated at least once");
    if g >= clear {
        return PlaneQuery::Witness {
            point: w,
            degenerate: false,
        };
    }
    exact_refine(&balls, &refs, w, r, tol)
}

// Settles near-critical and empty cases exactly: grow an active set of balls
// near the search point until its enclosing-ball center satisfies the rest.
fn exact_refine(
    balls: &[Ball],
    refs: &[(usize, usize)],
    w: Point3,
    r: f64,
    tol: &Tolerance,
) -> PlaneQuery {
    let slack = tol.slack(r);
    let centers: Vec<Point3> = balls.iter().map(|b| b.center).collect();
    let near = 1e-3 * r;
    let mut active: Vec<usize> = (0..balls.len())
        .filter(|&i| centers[i].dist(w) >= r - near)
        .collect();
    if active.is_empty() {
        active.push(0);
    }
    loop {
        let s = seb_of_subset(&centers, &active).expect("active set nonempty");
        let violators: Vec<usize> = (0..balls.len())
            .filter(|&i| !active.contains(&i) && centers[i].dist(s.center) > r + slack)
            .collect();
        if violators.is_empty() || tol.cmp(s.radius, r) == 1 {
            return match tol.cmp(s.radius, r) {
                1 => PlaneQuery::Empty(WitnessSet::from_refs(
                    s.support.iter().map(|&k| refs[k]).collect(),
                )),
                0 => PlaneQuery::Witness {
                    point: s.center,
                    degenerate: true,
                },
                _ => PlaneQuery::Witness {
                    point: s.center,
                    degenerate: degenerate_at(&centers, s.center, r, tol),
                },
            };
        }
        active.extend(violators);
    }
}

fn degenerate_at(centers: &[Point3], w: Point3, r: f64, tol: &Tolerance) -> bool {
    let band = 4.0 * tol.slack(r);
    let on: Vec<usize> = (0..centers.len())
        .filter(|&i| (centers[i].dist(w) - r).abs() <= band)
        .collect();
    if on.is_empty() {
        return false;
    }
    let s = seb_of_subset(centers, &on).expect("nonempty");
    tol.cmp(s.radius, r) != -1
}

/// True iff the balls whose boundary passes through `w` meet only in `w`.
pub fn is_degenerate<P: Borrow<SphericalPolytope>>(
    polys: &[P],
    w: Point3,
    tol: &Tolerance,
) -> Result<bool> {
    let (balls, _) = flatten(polys);
    let r = common_radius(&balls);
    if balls
        .iter()
        .any(|b| b.center.dist(w) - b.radius > 4.0 * tol.slack(b.radius))
    {
        return Err(Error::NotMember);
    }
    let centers: Vec<Point3> = balls.iter().map(|b| b.center).collect();
    Ok(degenerate_at(&centers, w, r, tol))
}
