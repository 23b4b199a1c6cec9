//! The surface searched for the left center in the separated-centers
//! decision: the right part of `∂K(P_L)` to the left of a separating plane
//! `λ` (optionally cut further by extra balls), the curves traced on it by
//! the spheres of the right-side points, their arrangement `M` and a single
//! tour through all of its cells.
//!
//! Every face lives on one sphere `∂B_r(q)` and every constraint on it is a
//! plane section, so each face arrangement is an arrangement of circles on a
//! sphere, traced with half-edges.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::ball_intersection::{build_polytope, CircleClip, SphericalPolytope};
use crate::error::{Error, Result};
use crate::geom::{
    planes_sphere_points, Arc3, Ball, Circle3, Direction, Plane, Point3, Tolerance, Vec3,
};

/// Which constraint a face boundary circle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundKind {
    /// Another ball of `K(P_L)`, by index into the left set.
    Ball(usize),
    /// An extra constraint ball, by index.
    Extra(usize),
    /// The outward normal must point along `+x` (the right part).
    RightPart,
    /// Left of the separating plane.
    Lambda,
}

/// Halfspace `normal·w ≤ offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub kind: BoundKind,
    pub normal: Vec3,
    pub offset: f64,
}

impl Bound {
    pub fn eval(&self, w: Point3) -> f64 {
        self.normal.dot(w) - self.offset
    }
}

// Points of the sphere around `q` covered by the congruent ball around `c`
// lie on the `c` side of the bisector plane.
fn bisector(q: Point3, c: Point3) -> (Vec3, f64) {
    let d = q.dist(c);
    let n = (q - c) / d;
    (n, n.dot(q) - 0.5 * d)
}

/// Section of the sphere `|w − q| = r` by the plane `n·w = d`.
fn plane_circle(q: Point3, r: f64, n: Vec3, d: f64, eps: f64) -> Option<Circle3> {
    let s = n.dot(q) - d;
    let rho2 = r * r - s * s;
    if rho2 < -2.0 * r * eps {
        return None;
    }
    Some(Circle3 {
        center: q - n * s,
        radius: rho2.max(0.0).sqrt(),
        normal: Direction::new(n),
    })
}

fn is_point_circle(c: &Circle3, r: f64, eps: f64) -> bool {
    c.radius * c.radius <= 2.0 * r * eps
}

// the single point of a (near) tangent plane section, pushed onto the sphere
fn point_of(c: &Circle3, q: Point3, r: f64) -> Point3 {
    let d = c.center - q;
    let n = d.norm();
    if n == 0.0 {
        return c.center;
    }
    q + d * (r / n)
}

/// One face of `σ`: the part of `∂B_r(center)` satisfying all bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaFace {
    /// Index of the ball in the left set.
    pub ball: usize,
    pub center: Point3,
    pub bounds: Vec<Bound>,
}

impl SigmaFace {
    pub fn contains(&self, w: Point3, eps: f64) -> bool {
        self.bounds.iter().all(|b| b.eval(w) <= eps)
    }

    fn clip(&self, circle: &Circle3, skip: &[BoundKind]) -> CircleClip {
        let mut clip = CircleClip::full();
        for b in &self.bounds {
            if !skip.contains(&b.kind) {
                clip.restrict_to_halfspace(circle, b.normal, b.offset);
            }
        }
        clip
    }
}

/// The searched surface `σ` for one orientation and separating plane.
#[derive(Debug, Clone)]
pub struct SigmaL {
    pub radius: f64,
    pub lambda: Plane,
    pub left: Vec<Point3>,
    pub extra: Vec<Ball>,
    pub polytope: SphericalPolytope,
    pub faces: Vec<SigmaFace>,
    /// Set when `K` is a single point; `σ` is then that point.
    pub point: Option<Point3>,
    eps: f64,
}

impl SigmaL {
    /// Working length tolerance.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Whether `w` lies on `σ` (within tolerance).
    pub fn contains(&self, w: Point3) -> bool {
        let e = 4.0 * self.eps;
        if let Some(p) = self.point {
            return p.dist(w) <= e;
        }
        self.faces
            .iter()
            .any(|f| (f.center.dist(w) - self.radius).abs() <= e && f.contains(w, e))
    }

    /// Boundary arcs of every face, tagged with the face index and the
    /// constraint they lie on.
    pub fn boundary_arcs(&self) -> Vec<(usize, BoundKind, Arc3)> {
        let mut out = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            for b in &f.bounds {
                let Some(c) = plane_circle(f.center, self.radius, b.normal, b.offset, self.eps)
                else {
                    continue;
                };
                if is_point_circle(&c, self.radius, self.eps) {
                    continue;
                }
                for (t0, t1) in f.clip(&c, &[b.kind]).arcs(1e-12) {
                    out.push((fi, b.kind, Arc3::new(c, t0, t1)));
                }
            }
        }
        out
    }

    /// Arcs of the hole cut by `λ`.
    pub fn hole_arcs(&self) -> Vec<Arc3> {
        self.boundary_arcs()
            .into_iter()
            .filter(|a| a.1 == BoundKind::Lambda)
            .map(|a| a.2)
            .collect()
    }
}

/// Builds `σ` for the left set `P_L`: the part of `∂K(P_L)` whose outward
/// normal has a nonnegative component along the normal of `λ`, lying on the
/// nonpositive side of `λ` and inside every extra ball. `None` when empty.
pub fn build_sigma(
    left: &[Point3],
    r: f64,
    lambda: &Plane,
    extra: &[Ball],
    tol: &Tolerance,
) -> Result<Option<SigmaL>> {
    if left.is_empty() {
        return Err(Error::EmptyInput);
    }
    let balls: Vec<Ball> = left.iter().map(|&p| Ball::new(p, r)).collect();
    let Some(poly) = build_polytope(&balls, tol)? else {
        return Ok(None);
    };
    let scale = left
        .iter()
        .chain(extra.iter().map(|b| &b.center))
        .fold(r, |m, p| m.max(p.max_abs()));
    let eps = tol.slack(scale);
    let v = lambda.normal.vec();
    let mut sigma = SigmaL {
        radius: r,
        lambda: *lambda,
        left: left.to_vec(),
        extra: extra.to_vec(),
        polytope: poly,
        faces: Vec::new(),
        point: None,
        eps,
    };
    if let Some(w) = sigma.polytope.degenerate {
        let ok =
            lambda.eval(w) <= 4.0 * eps && extra.iter().all(|b| b.center.dist(w) <= r + 4.0 * eps);
        if !ok {
            return Ok(None);
        }
        sigma.point = Some(w);
        return Ok(Some(sigma));
    }
    for face in &sigma.polytope.faces {
        if face.degenerate {
            continue;
        }
        let q = left[face.ball];
        let mut nbrs: Vec<usize> = face
            .cycles
            .iter()
            .flatten()
            .map(|&e| {
                let (a, b) = sigma.polytope.edges[e].balls;
                if a == face.ball {
                    b
                } else {
                    a
                }
            })
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        let mut bounds: Vec<Bound> = nbrs
            .iter()
            .map(|&j| {
                let (n, d) = bisector(q, left[j]);
                Bound {
                    kind: BoundKind::Ball(j),
                    normal: n,
                    offset: d,
                }
            })
            .collect();
        let mut dead = false;
        for (k, b) in extra.iter().enumerate() {
            let d = q.dist(b.center);
            if d > 2.0 * r + 4.0 * eps {
                dead = true;
                break;
            }
            if d <= eps {
                continue;
            }
            let (n, off) = bisector(q, b.center);
            bounds.push(Bound {
                kind: BoundKind::Extra(k),
                normal: n,
                offset: off,
            });
        }
        if dead {
            continue;
        }
        bounds.push(Bound {
            kind: BoundKind::RightPart,
            normal: -v,
            offset: -v.dot(q),
        });
        bounds.push(Bound {
            kind: BoundKind::Lambda,
            normal: v,
            offset: lambda.offset,
        });
        let f = SigmaFace {
            ball: face.ball,
            center: q,
            bounds,
        };
        let alive = f.bounds.iter().any(|b| {
            plane_circle(q, r, b.normal, b.offset, eps).is_some_and(|c| {
                !is_point_circle(&c, r, eps) && !f.clip(&c, &[b.kind]).arcs(1e-12).is_empty()
            })
        });
        if alive {
            sigma.faces.push(f);
        }
    }
    if sigma.faces.is_empty() {
        return Ok(None);
    }
    Ok(Some(sigma))
}

/// Piece of a curve inside one face of `σ`. A zero-radius circle marks a
/// single tangency point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePiece {
    pub face: usize,
    pub arc: Arc3,
}

impl CurvePiece {
    pub fn is_point(&self) -> bool {
        self.arc.circle.radius == 0.0
    }
}

/// The trace `γ_p = ∂B_r(p) ∩ σ`, split per face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCurve {
    /// Caller's id of the source point.
    pub index: usize,
    pub point: Point3,
    pub pieces: Vec<CurvePiece>,
}

impl GammaCurve {
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

/// Computes `γ_p` on `σ`.
pub fn gamma_curve(index: usize, p: Point3, sigma: &SigmaL) -> GammaCurve {
    let r = sigma.radius;
    let eps = sigma.eps;
    let mut pieces = Vec::new();
    if let Some(w) = sigma.point {
        if (w.dist(p) - r).abs() <= 4.0 * eps {
            let c = Circle3 {
                center: w,
                radius: 0.0,
                normal: Direction::X,
            };
            pieces.push(CurvePiece {
                face: 0,
                arc: Arc3::new(c, 0.0, 0.0),
            });
        }
        return GammaCurve {
            index,
            point: p,
            pieces,
        };
    }
    for (fi, f) in sigma.faces.iter().enumerate() {
        let d = f.center.dist(p);
        if d > 2.0 * r + 4.0 * eps || d <= eps {
            continue;
        }
        let (n, off) = bisector(f.center, p);
        let Some(c) = plane_circle(f.center, r, n, off, eps) else {
            continue;
        };
        if is_point_circle(&c, r, eps) {
            let w = point_of(&c, f.center, r);
            if f.contains(w, 4.0 * eps) {
                let c0 = Circle3 {
                    center: w,
                    radius: 0.0,
                    normal: c.normal,
                };
                pieces.push(CurvePiece {
                    face: fi,
                    arc: Arc3::new(c0, 0.0, 0.0),
                });
            }
            continue;
        }
        for (t0, t1) in f.clip(&c, &[]).arcs(1e-12) {
            pieces.push(CurvePiece {
                face: fi,
                arc: Arc3::new(c, t0, t1),
            });
        }
    }
    GammaCurve {
        index,
        point: p,
        pieces,
    }
}

/// Cell, edge or vertex of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeRef {
    Cell(usize),
    Edge(usize),
    Vertex(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapVertex {
    pub face: usize,
    pub point: Point3,
    /// Curves through the vertex.
    pub curves: Vec<usize>,
    /// Lies on the boundary of its face.
    pub on_boundary: bool,
    /// Added only to anchor a closed loop; not a geometric vertex.
    pub synthetic: bool,
    pub uncovered: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEdge {
    pub face: usize,
    pub arc: Arc3,
    pub ends: (usize, usize),
    pub curves: Vec<usize>,
    pub bounds: Vec<BoundKind>,
    /// Cells to the left and right of the arc direction (seen from outside
    /// the sphere); `None` outside the face.
    pub cells: (Option<usize>, Option<usize>),
    pub uncovered: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub face: usize,
    /// Curve ids whose balls miss the cell.
    pub uncovered: Vec<usize>,
    /// Number of boundary cycles.
    pub cycles: usize,
    /// Interior point, when one could be validated.
    pub rep: Option<Point3>,
}

/// Counts for the Euler check of one face arrangement (the graph on the
/// whole sphere, synthetic and isolated vertices included).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceTopology {
    pub vertices: usize,
    pub edges: usize,
    pub cycles: usize,
    pub components: usize,
}

impl FaceTopology {
    /// `V − E + cycles = 2·components` for a graph embedded in a sphere.
    pub fn euler_ok(&self) -> bool {
        self.vertices as i64 - self.edges as i64 + self.cycles as i64 == 2 * self.components as i64
    }
}

/// The arrangement `M` on `σ`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MapM {
    pub vertices: Vec<MapVertex>,
    pub edges: Vec<MapEdge>,
    pub cells: Vec<MapCell>,
    pub topology: Vec<FaceTopology>,
    /// Common vertices of each pair of curves.
    pub pair_hits: BTreeMap<(usize, usize), usize>,
    /// Arcs of `C_ab` outside `K(P_L)` with both ends on `σ`, per pair.
    pub pair_arcs: BTreeMap<(usize, usize), usize>,
}

impl MapM {
    /// Geometric vertices (synthetic anchors excluded).
    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().filter(|v| !v.synthetic).count()
    }

    pub fn node_count(&self) -> usize {
        self.vertices.len() + self.edges.len() + self.cells.len()
    }

    pub fn uncovered(&self, node: NodeRef) -> &[usize] {
        match node {
            NodeRef::Cell(i) => &self.cells[i].uncovered,
            NodeRef::Edge(i) => &self.edges[i].uncovered,
            NodeRef::Vertex(i) => &self.vertices[i].uncovered,
        }
    }

    pub fn euler_ok(&self) -> bool {
        self.topology.iter().all(FaceTopology::euler_ok)
    }

    pub fn max_pair_hits(&self) -> usize {
        self.pair_hits.values().copied().max().unwrap_or(0)
    }

    pub fn max_pair_arcs(&self) -> usize {
        self.pair_arcs.values().copied().max().unwrap_or(0)
    }
}

/// Bound on the intersections of two curves on `σ` and on the relevant arcs
/// of their intersection circle.
pub const PAIR_ARC_BOUND: usize = 3;

// a label of a face circle; `flip` when the label's halfspace normal is
// opposite to the circle's plane normal
#[derive(Debug, Clone, Copy)]
enum Label {
    Bound(usize, bool),
    Curve(usize, bool),
}

struct FCircle {
    n: Vec3,
    d: f64,
    circle: Circle3,
    point: bool,
    labels: Vec<Label>,
}

struct FaceCtx<'a> {
    face: &'a SigmaFace,
    r: f64,
    eps: f64,
    circles: Vec<FCircle>,
    /// Curve ids on this face's circles, with their bisector planes.
    curve_planes: Vec<(usize, Vec3, f64)>,
    /// Curves with no circle here, and whether they cover the face.
    constant: Vec<(usize, bool)>,
}

impl FaceCtx<'_> {
    fn add(&mut self, n: Vec3, d: f64, label: Label) -> Option<usize> {
        let e = 4.0 * self.eps;
        for (k, c) in self.circles.iter_mut().enumerate() {
            let dot = n.dot(c.n);
            let same = dot > 1.0 - 1e-12 && (d - c.d).abs() <= e;
            let opp = dot < -(1.0 - 1e-12) && (d + c.d).abs() <= e;
            if same || opp {
                c.labels.push(match label {
                    Label::Bound(i, _) => Label::Bound(i, opp),
                    Label::Curve(i, _) => Label::Curve(i, opp),
                });
                return Some(k);
            }
        }
        let circle = plane_circle(self.face.center, self.r, n, d, self.eps)?;
        let point = is_point_circle(&circle, self.r, self.eps);
        self.circles.push(FCircle {
            n,
            d,
            circle,
            point,
            labels: vec![label],
        });
        Some(self.circles.len() - 1)
    }

    // covered status of every curve at `w`; curves labelled on `on` count as
    // covered, others use the sign of their plane with slack `slack`
    fn uncovered_at(&self, w: Point3, on: &[usize], slack: f64) -> Vec<usize> {
        let mut out = Vec::new();
        for &(id, n, d) in &self.curve_planes {
            let through = on.iter().any(|&c| {
                self.circles[c]
                    .labels
                    .iter()
                    .any(|l| matches!(l, Label::Curve(i, _) if *i == id))
            });
            if !through && n.dot(w) - d > slack {
                out.push(id);
            }
        }
        for &(id, covered) in &self.constant {
            if !covered {
                out.push(id);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn in_region(&self, w: Point3, skip_circle: Option<usize>) -> bool {
        let skip: Vec<usize> = match skip_circle {
            Some(c) => self.circles[c]
                .labels
                .iter()
                .filter_map(|l| match l {
                    Label::Bound(i, _) => Some(*i),
                    _ => None,
                })
                .collect(),
            None => Vec::new(),
        };
        self.face
            .bounds
            .iter()
            .enumerate()
            .all(|(i, b)| skip.contains(&i) || b.eval(w) <= 4.0 * self.eps)
    }
}

/// Builds `M` from `σ` and the curves of the right-side points.
///
/// Fails with `IntersectionBoundViolated` when two curves meet more than
/// [`PAIR_ARC_BOUND`] times, or when their intersection circle has more than
/// that many arcs outside `K(P_L)` ending on `σ`.
pub fn build_map(sigma: &SigmaL, curves: &[GammaCurve]) -> Result<MapM> {
    let r = sigma.radius;
    let eps = sigma.eps;
    let mut map = MapM::default();
    if let Some(w) = sigma.point {
        let mut unc: Vec<usize> = curves
            .iter()
            .filter(|c| c.point.dist(w) > r + 4.0 * eps)
            .map(|c| c.index)
            .collect();
        unc.sort_unstable();
        let on: Vec<usize> = curves
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| c.index)
            .collect();
        map.vertices.push(MapVertex {
            face: 0,
            point: w,
            curves: on,
            on_boundary: true,
            synthetic: false,
            uncovered: unc,
        });
        map.topology.push(FaceTopology {
            vertices: 1,
            edges: 0,
            cycles: 1,
            components: 1,
        });
        return Ok(map);
    }
    for (fi, face) in sigma.faces.iter().enumerate() {
        build_face(&mut map, fi, face, sigma, curves);
    }
    for v in &map.vertices {
        if v.synthetic {
            continue;
        }
        for (i, &a) in v.curves.iter().enumerate() {
            for &b in &v.curves[i + 1..] {
                *map.pair_hits.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
    }
    if let Some((&(a, b), &count)) = map.pair_hits.iter().find(|e| *e.1 > PAIR_ARC_BOUND) {
        return Err(Error::IntersectionBoundViolated { a, b, count });
    }
    let by_id: BTreeMap<usize, Point3> = curves.iter().map(|c| (c.index, c.point)).collect();
    let pairs: Vec<(usize, usize)> = map.pair_hits.keys().copied().collect();
    for (a, b) in pairs {
        let count = pair_arc_count(by_id[&a], by_id[&b], sigma);
        map.pair_arcs.insert((a, b), count);
        if count > PAIR_ARC_BOUND {
            return Err(Error::IntersectionBoundViolated { a, b, count });
        }
    }
    Ok(map)
}

fn build_face(map: &mut MapM, fi: usize, face: &SigmaFace, sigma: &SigmaL, curves: &[GammaCurve]) {
    let r = sigma.radius;
    let eps = sigma.eps;
    let q = face.center;
    let mut ctx = FaceCtx {
        face,
        r,
        eps,
        circles: Vec::new(),
        curve_planes: Vec::new(),
        constant: Vec::new(),
    };
    for (i, b) in face.bounds.iter().enumerate() {
        ctx.add(b.normal, b.offset, Label::Bound(i, false));
    }
    // a reference point of the region for curves that never enter it
    let reference = sigma
        .boundary_arcs()
        .into_iter()
        .find(|a| a.0 == fi)
        .map(|a| a.2.midpoint())
        .unwrap_or(q);
    for c in curves {
        let here = c.pieces.iter().any(|p| p.face == fi);
        let d = q.dist(c.point);
        if !here || d <= eps {
            ctx.constant
                .push((c.index, c.point.dist(reference) <= r + 4.0 * eps));
            continue;
        }
        let (n, off) = bisector(q, c.point);
        ctx.curve_planes.push((c.index, n, off));
        ctx.add(n, off, Label::Curve(c.index, false));
    }

    // raw vertices
    let mut raw: Vec<(Point3, Vec<usize>)> = Vec::new();
    let nc = ctx.circles.len();
    for i in 0..nc {
        if ctx.circles[i].point {
            raw.push((point_of(&ctx.circles[i].circle, q, r), vec![i]));
            continue;
        }
        for j in i + 1..nc {
            if ctx.circles[j].point {
                continue;
            }
            let (a, b) = (&ctx.circles[i], &ctx.circles[j]);
            let tol = Tolerance::new(eps, 0.0);
            for p in planes_sphere_points(a.n, a.d, b.n, b.d, q, r, &tol) {
                raw.push((p, vec![i, j]));
            }
        }
    }
    // merge nearby raw vertices
    let merge = 100.0 * eps;
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[a].0.x.total_cmp(&raw[b].0.x));
    let mut parent: Vec<usize> = (0..raw.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for s in 0..order.len() {
        for t in s + 1..order.len() {
            let (a, b) = (order[s], order[t]);
            if raw[b].0.x - raw[a].0.x > merge {
                break;
            }
            if raw[a].0.dist(raw[b].0) <= merge {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut group: BTreeMap<usize, usize> = BTreeMap::new();
    let mut verts: Vec<(Point3, Vec<usize>)> = Vec::new();
    for i in 0..raw.len() {
        let root = find(&mut parent, i);
        let k = *group.entry(root).or_insert_with(|| {
            verts.push((raw[root].0, Vec::new()));
            verts.len() - 1
        });
        let cs = raw[i].1.clone();
        verts[k].1.extend(cs);
    }
    for v in &mut verts {
        for (c, fc) in ctx.circles.iter().enumerate() {
            if !fc.point && (fc.n.dot(v.0) - fc.d).abs() <= merge {
                v.1.push(c);
            }
        }
        v.1.sort_unstable();
        v.1.dedup();
    }

    // arcs between consecutive vertices on every circle, kept when inside
    struct RawEdge {
        circle: usize,
        t0: f64,
        t1: f64,
        a: usize,
        b: usize,
    }
    let mut redges: Vec<RawEdge> = Vec::new();
    let mut synthetic: Vec<bool> = vec![false; verts.len()];
    for c in 0..nc {
        if ctx.circles[c].point {
            continue;
        }
        let circ = ctx.circles[c].circle;
        let mut on: Vec<(f64, usize)> = (0..verts.len())
            .filter(|&v| verts[v].1.contains(&c))
            .map(|v| (circ.angle_of(verts[v].0), v))
            .collect();
        on.sort_by(|a, b| a.0.total_cmp(&b.0));
        on.dedup_by_key(|x| x.1);
        if on.is_empty() {
            if ctx.in_region(circ.point_at(0.0), Some(c)) {
                verts.push((circ.point_at(0.0), vec![c]));
                synthetic.push(true);
                let v = verts.len() - 1;
                redges.push(RawEdge {
                    circle: c,
                    t0: 0.0,
                    t1: TAU,
                    a: v,
                    b: v,
                });
            }
            continue;
        }
        for k in 0..on.len() {
            let (t0, a) = on[k];
            let (mut t1, b) = on[(k + 1) % on.len()];
            if k + 1 == on.len() {
                t1 += TAU;
            }
            if t1 - t0 <= 1e-12 {
                continue;
            }
            if ctx.in_region(circ.point_at(0.5 * (t0 + t1)), Some(c)) {
                redges.push(RawEdge {
                    circle: c,
                    t0,
                    t1,
                    a,
                    b,
                });
            }
        }
    }

    // final vertex ids
    let mut used = vec![false; verts.len()];
    for e in &redges {
        used[e.a] = true;
        used[e.b] = true;
    }
    let mut isolated = Vec::new();
    for (v, (p, cs)) in verts.iter().enumerate() {
        if !used[v] && cs.len() == 1 && ctx.circles[cs[0]].point && ctx.in_region(*p, None) {
            used[v] = true;
            isolated.push(v);
        }
    }
    let vbase = map.vertices.len();
    let mut vid = vec![usize::MAX; verts.len()];
    for v in 0..verts.len() {
        if !used[v] {
            continue;
        }
        vid[v] = map.vertices.len();
        let (p, cs) = &verts[v];
        let mut on_curves = Vec::new();
        let mut on_boundary = false;
        for &c in cs {
            for l in &ctx.circles[c].labels {
                match *l {
                    Label::Curve(i, _) => on_curves.push(i),
                    Label::Bound(..) => on_boundary = true,
                }
            }
        }
        on_curves.sort_unstable();
        on_curves.dedup();
        map.vertices.push(MapVertex {
            face: fi,
            point: *p,
            curves: on_curves,
            on_boundary,
            synthetic: synthetic[v],
            uncovered: ctx.uncovered_at(*p, cs, 4.0 * eps),
        });
    }

    // half-edges: 2e runs along increasing angle, 2e + 1 against it
    let ne = redges.len();
    let mut outgoing: Vec<Vec<(f64, f64, usize)>> = vec![Vec::new(); verts.len()];
    for (e, re) in redges.iter().enumerate() {
        let circ = ctx.circles[re.circle].circle;
        for (h, v, t, sgn) in [(2 * e, re.a, re.t0, 1.0), (2 * e + 1, re.b, re.t1, -1.0)] {
            let w = verts[v].0;
            let nu = (w - q) / r;
            let dir = circ.tangent_at(t) * sgn;
            let (e1, e2) = Direction::new(nu).frame();
            let ang = dir.dot(e2).atan2(dir.dot(e1));
            let left = nu.cross(dir);
            let kappa = (circ.center - w).dot(left) / (circ.radius * circ.radius);
            outgoing[v].push((ang, kappa, h));
        }
    }
    let mut pos = vec![0usize; 2 * ne];
    for list in &mut outgoing {
        list.sort_by(|a, b| {
            let da = a.0 - b.0;
            if da.abs() <= 1e-9 {
                a.1.total_cmp(&b.1)
            } else {
                a.0.total_cmp(&b.0)
            }
        });
        for (i, o) in list.iter().enumerate() {
            pos[o.2] = i;
        }
    }
    let head = |h: usize| {
        if h % 2 == 0 {
            redges[h / 2].b
        } else {
            redges[h / 2].a
        }
    };
    let next = |h: usize| {
        let v = head(h);
        let twin = h ^ 1;
        let list = &outgoing[v];
        list[(pos[twin] + list.len() - 1) % list.len()].2
    };
    let mut cycle_of = vec![usize::MAX; 2 * ne];
    let mut cycle_first = Vec::new();
    for h0 in 0..2 * ne {
        if cycle_of[h0] != usize::MAX {
            continue;
        }
        let id = cycle_first.len();
        cycle_first.push(h0);
        let mut h = h0;
        loop {
            cycle_of[h] = id;
            h = next(h);
            if h == h0 || cycle_of[h] != usize::MAX {
                break;
            }
        }
    }

    // left-side status of the first half-edge of each cycle
    let left_info = |h: usize| -> (bool, Vec<usize>, Point3) {
        let re = &redges[h / 2];
        let fc = &ctx.circles[re.circle];
        let tm = 0.5 * (re.t0 + re.t1);
        let w = fc.circle.point_at(tm);
        let nu = (w - q) / r;
        let t = fc.circle.tangent_at(tm) * if h % 2 == 0 { 1.0 } else { -1.0 };
        let left_negative = fc.n.dot(nu.cross(t)) < 0.0;
        let mut inside = true;
        for l in &fc.labels {
            if let Label::Bound(_, flip) = *l {
                inside &= left_negative != flip;
            }
        }
        let mut unc = Vec::new();
        for &(id, n, d) in &ctx.curve_planes {
            let own = fc.labels.iter().find_map(|l| match *l {
                Label::Curve(i, flip) if i == id => Some(flip),
                _ => None,
            });
            let covered = match own {
                Some(flip) => left_negative != flip,
                None => n.dot(w) - d <= 0.0,
            };
            if !covered {
                unc.push(id);
            }
        }
        for &(id, covered) in &ctx.constant {
            if !covered {
                unc.push(id);
            }
        }
        unc.sort_unstable();
        unc.dedup();
        (inside, unc, w)
    };

    let mut cell_of_cycle = vec![None; cycle_first.len()];
    let mut by_sig: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (cy, &h) in cycle_first.iter().enumerate() {
        let (inside, unc, _) = left_info(h);
        if !inside {
            continue;
        }
        let id = match by_sig.get(&unc) {
            Some(&id) => id,
            None => {
                let id = map.cells.len();
                map.cells.push(MapCell {
                    face: fi,
                    uncovered: unc.clone(),
                    cycles: 0,
                    rep: None,
                });
                by_sig.insert(unc, id);
                // representative: step left off the first half-edge
                map.cells[id].rep = cell_rep(
                    &ctx,
                    redges[h / 2].circle,
                    h,
                    redges[h / 2].t0,
                    redges[h / 2].t1,
                    &map.cells[id].uncovered,
                );
                id
            }
        };
        map.cells[id].cycles += 1;
        cell_of_cycle[cy] = Some(id);
    }
    for (e, re) in redges.iter().enumerate() {
        let fc = &ctx.circles[re.circle];
        let mut ecurves = Vec::new();
        let mut bounds = Vec::new();
        for l in &fc.labels {
            match *l {
                Label::Curve(i, _) => ecurves.push(i),
                Label::Bound(i, _) => bounds.push(face.bounds[i].kind),
            }
        }
        let w = fc.circle.point_at(0.5 * (re.t0 + re.t1));
        map.edges.push(MapEdge {
            face: fi,
            arc: Arc3::new(fc.circle, re.t0, re.t1),
            ends: (vid[re.a], vid[re.b]),
            curves: ecurves,
            bounds,
            cells: (
                cell_of_cycle[cycle_of[2 * e]],
                cell_of_cycle[cycle_of[2 * e + 1]],
            ),
            uncovered: ctx.uncovered_at(w, &[re.circle], 0.0),
        });
    }

    // Euler bookkeeping for this face
    let nv = map.vertices.len() - vbase;
    let mut uf: Vec<usize> = (0..nv).collect();
    for re in &redges {
        let (a, b) = (
            find(&mut uf, vid[re.a] - vbase),
            find(&mut uf, vid[re.b] - vbase),
        );
        uf[a] = b;
    }
    let components = (0..nv).filter(|&i| find(&mut uf, i) == i).count();
    map.topology.push(FaceTopology {
        vertices: nv,
        edges: ne,
        cycles: cycle_first.len() + isolated.len(),
        components,
    });
}

// Interior point of the cell left of half-edge `h`, validated against the
// cell's signature and the face bounds.
fn cell_rep(
    ctx: &FaceCtx<'_>,
    circle: usize,
    h: usize,
    t0: f64,
    t1: f64,
    want: &[usize],
) -> Option<Point3> {
    let fc = &ctx.circles[circle];
    let q = ctx.face.center;
    let r = ctx.r;
    let tm = 0.5 * (t0 + t1);
    let w = fc.circle.point_at(tm);
    let nu = (w - q) / r;
    let t = fc.circle.tangent_at(tm) * if h % 2 == 0 { 1.0 } else { -1.0 };
    let left = nu.cross(t);
    let mut step = (0.25 * (t1 - t0) * fc.circle.radius).min(1e-3 * r);
    for _ in 0..40 {
        let p = q + (w - q + left * step).normalized() * r;
        let ok_region = ctx.face.bounds.iter().all(|b| b.eval(p) < 0.0);
        if ok_region && ctx.uncovered_at(p, &[], 0.0) == want {
            return Some(p);
        }
        step *= 0.5;
    }
    None
}

/// Number of arcs of `C_ab = ∂B_r(a) ∩ ∂B_r(b)` lying outside `K(P_L)` with
/// both endpoints on `σ`.
pub fn pair_arc_count(a: Point3, b: Point3, sigma: &SigmaL) -> usize {
    let r = sigma.radius;
    let d = a.dist(b);
    if d >= 2.0 * r || d == 0.0 {
        return 0;
    }
    let mid = a.midpoint(b);
    let circle = Circle3 {
        center: mid,
        radius: (r * r - 0.25 * d * d).sqrt(),
        normal: Direction::new(b - a),
    };
    let mut clip = CircleClip::full();
    for &p in &sigma.left {
        clip.restrict_to_ball(&circle, &Ball::new(p, r));
    }
    let inside = clip.arcs(0.0);
    if inside.is_empty() {
        return 0;
    }
    // outside arcs run from the end of one inside arc to the start of the next
    let mut count = 0;
    for k in 0..inside.len() {
        let end = inside[k].1;
        let start = if k + 1 < inside.len() {
            inside[k + 1].0
        } else {
            inside[0].0 + TAU
        };
        if start - end <= 1e-12 {
            continue;
        }
        if sigma.contains(circle.point_at(end)) && sigma.contains(circle.point_at(start)) {
            count += 1;
        }
    }
    count
}

/// Outcome of one short-arc census trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcCensus {
    /// `ω = C_ab \ B_r(q)`.
    pub arc: Arc3,
    pub shorter_than_semicircle: bool,
    /// Side of `λ` of both endpoints (`+1` right, `−1` left, `0` on it).
    pub endpoint_sides: [i8; 2],
}

impl ArcCensus {
    pub fn has_right_endpoint(&self) -> bool {
        self.endpoint_sides.iter().any(|&s| s >= 0)
    }
}

/// Computes `ω = C_ab \ B_r(q)` and the sides of its endpoints.
pub fn short_arc_census(
    a: Point3,
    b: Point3,
    q: Point3,
    r: f64,
    lambda: &Plane,
    tol: &Tolerance,
) -> Result<ArcCensus> {
    let d = a.dist(b);
    if d >= 2.0 * r || d == 0.0 {
        return Err(Error::NoIntersection);
    }
    let circle = Circle3 {
        center: a.midpoint(b),
        radius: (r * r - 0.25 * d * d).sqrt(),
        normal: Direction::new(b - a),
    };
    let (u, v) = circle.axes();
    let rho = circle.radius;
    let off = circle.center - q;
    // outside B_r(q): the reverse of the ball constraint
    let mut clip = CircleClip::full();
    clip.restrict(
        -2.0 * rho * off.dot(u),
        -2.0 * rho * off.dot(v),
        -(r * r - off.norm2() - rho * rho),
    );
    let arcs = clip.arcs(0.0);
    if arcs.len() != 1 || arcs[0].1 - arcs[0].0 >= TAU - 1e-12 {
        return Err(Error::NoIntersection);
    }
    let arc = Arc3::new(circle, arcs[0].0, arcs[0].1);
    let scale = r + q.max_abs().max(a.max_abs()).max(b.max_abs());
    let side = |p: Point3| tol.sign(lambda.eval(p), scale);
    Ok(ArcCensus {
        arc,
        shorter_than_semicircle: arc.span() < PI,
        endpoint_sides: [side(arc.start()), side(arc.end())],
    })
}

/// Totals of a randomized short-arc audit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub trials: usize,
    /// Trials where `C_ab` exists and leaves `B_r(q)` along a single arc.
    pub valid: usize,
    pub short_arcs: usize,
    /// Short arcs with both endpoints strictly left of `λ`.
    pub violations: usize,
}

/// Samples `a, b` right of `λ: x = x0` and `q` left of it, all within a box
/// of half-width `s <= r`, and checks every sub-semicircle arc
/// `C_ab \ B_r(q)` for an endpoint on the right.
pub fn random_arc_census(trials: usize, seed: u64, tol: &Tolerance) -> CensusReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rep = CensusReport {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let r = rng.gen_range(0.5..1.5);
        let x = rng.gen_range(-0.5..0.5);
        let s = rng.gen_range(0.2..1.0) * r;
        let mut pt = |lo: f64, hi: f64| {
            Point3::new(
                rng.gen_range(lo..hi),
                rng.gen_range(-s..s),
                rng.gen_range(-s..s),
            )
        };
        let (a, b, q) = (pt(x, x + s), pt(x, x + s), pt(x - s, x));
        let lambda = Plane::new(Point3::new(1.0, 0.0, 0.0), x);
        let Ok(c) = short_arc_census(a, b, q, r, &lambda, tol) else {
            continue;
        };
        rep.valid += 1;
        if c.shorter_than_semicircle {
            rep.short_arcs += 1;
            rep.violations += usize::from(!c.has_right_endpoint());
        }
    }
    rep
}

/// One move of the grand tour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TourMove {
    /// Node reached (for transit moves, the node being walked toward).
    pub node: NodeRef,
    pub toggled: Option<usize>,
    /// `false` on transit moves whose membership set is not that of a node.
    pub evaluate: bool,
}

/// Walk through every node of `M` where each move toggles at most one id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrandTour {
    /// Uncovered ids at the first move.
    pub initial: Vec<usize>,
    pub moves: Vec<TourMove>,
}

impl GrandTour {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn toggles(&self) -> Vec<Option<usize>> {
        self.moves.iter().map(|m| m.toggled).collect()
    }

    /// Uncovered set after every move, replayed from the toggles.
    pub fn replay(&self) -> Vec<Vec<usize>> {
        let mut cur: std::collections::BTreeSet<usize> = self.initial.iter().copied().collect();
        let mut out = Vec::with_capacity(self.moves.len());
        for (i, m) in self.moves.iter().enumerate() {
            if let (Some(k), true) = (m.toggled, i > 0) {
                if !cur.remove(&k) {
                    cur.insert(k);
                }
            }
            out.push(cur.iter().copied().collect());
        }
        out
    }
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

/// Tours every node of `M`. Nodes of one face are walked depth-first along
/// incidences; separate pieces are chained by transit moves that toggle the
/// differing ids one at a time.
pub fn grand_tour(map: &MapM) -> GrandTour {
    let nc = map.cells.len();
    let ne = map.edges.len();
    let total = map.node_count();
    let node = |i: usize| {
        if i < nc {
            NodeRef::Cell(i)
        } else if i < nc + ne {
            NodeRef::Edge(i - nc)
        } else {
            NodeRef::Vertex(i - nc - ne)
        }
    };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
        adj[a].push(b);
        adj[b].push(a);
    };
    for (e, edge) in map.edges.iter().enumerate() {
        let en = nc + e;
        link(en, nc + ne + edge.ends.0, &mut adj);
        if edge.ends.1 != edge.ends.0 {
            link(en, nc + ne + edge.ends.1, &mut adj);
        }
        for c in [edge.cells.0, edge.cells.1].into_iter().flatten() {
            link(en, c, &mut adj);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut walk: Vec<usize> = Vec::new();
    let mut seen = vec![false; total];
    for start in 0..total {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        walk.push(start);
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        while let Some(&mut (u, ref mut k)) = stack.last_mut() {
            if *k < adj[u].len() {
                let w = adj[u][*k];
                *k += 1;
                if !seen[w] {
                    seen[w] = true;
                    walk.push(w);
                    stack.push((w, 0));
                }
            } else {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    walk.push(p);
                }
            }
        }
        // drop the trailing walk back to the start of this piece
        while walk.len() > 1 && *walk.last().unwrap() != start && {
            let last = *walk.last().unwrap();
            walk[..walk.len() - 1].contains(&last)
        } {
            walk.pop();
        }
        if walk.len() > 1
            && *walk.last().unwrap() == start
            && walk[..walk.len() - 1].contains(&start)
        {
            walk.pop();
        }
    }

    let mut tour = GrandTour {
        initial: Vec::new(),
        moves: Vec::new(),
    };
    let Some(&first) = walk.first() else {
        return tour;
    };
    tour.initial = map.uncovered(node(first)).to_vec();
    tour.moves.push(TourMove {
        node: node(first),
        toggled: None,
        evaluate: true,
    });
    let mut cur = tour.initial.clone();
    for &w in &walk[1..] {
        let target = map.uncovered(node(w));
        let diff = sym_diff(&cur, target);
        if diff.is_empty() {
            tour.moves.push(TourMove {
                node: node(w),
                toggled: None,
                evaluate: true,
            });
        } else {
            for (i, &k) in diff.iter().enumerate() {
                tour.moves.push(TourMove {
                    node: node(w),
                    toggled: Some(k),
                    evaluate: i + 1 == diff.len(),
                });
            }
        }
        cur = target.to_vec();
    }
    tour
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn lam(x: f64) -> Plane {
        Plane::new(Point3::new(1.0, 0.0, 0.0), x)
    }

    fn rand_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64, s: f64) -> Point3 {
        Point3::new(
            rng.gen_range(lo..hi),
            rng.gen_range(-s..s),
            rng.gen_range(-s..s),
        )
    }

    // a separated random instance: left cluster near the origin, right one
    // shifted along x, split by x = split
    fn instance(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Point3>, Vec<Point3>, f64, f64) {
        let left: Vec<Point3> = (0..n / 2)
            .map(|_| rand_point(rng, -0.5, 0.5, 0.5))
            .collect();
        let right: Vec<Point3> = (0..n - n / 2)
            .map(|_| rand_point(rng, 0.8, 1.8, 0.5))
            .collect();
        (left, right, 1.05, 0.7)
    }

    fn sample_on_sigma(s: &SigmaL, rng: &mut ChaCha8Rng, tries: usize) -> Vec<Point3> {
        let mut out = Vec::new();
        for _ in 0..tries {
            let f = &s.faces[rng.gen_range(0..s.faces.len())];
            let d = rand_point(rng, -1.0, 1.0, 1.0);
            if d.norm() < 1e-3 {
                continue;
            }
            let w = f.center + d.normalized() * s.radius;
            if f.contains(w, 0.0) {
                out.push(w);
            }
        }
        out
    }

    #[test]
    fn single_ball_cap() {
        let s = build_sigma(&[Point3::ORIGIN], 1.0, &lam(0.5), &[], &tol())
            .unwrap()
            .unwrap();
        assert_eq!(s.faces.len(), 1);
        let hole = s.hole_arcs();
        assert_eq!(hole.len(), 1);
        assert!(hole[0].is_full());
        assert!((hole[0].circle.radius - (0.75f64).sqrt()).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let pts = sample_on_sigma(&s, &mut rng, 2000);
        assert!(!pts.is_empty());
        for w in pts {
            assert!(w.x >= 0.0 && w.x <= 0.5);
        }
    }

    #[test]
    fn far_pair_is_empty() {
        let pts = [Point3::ORIGIN, Point3::new(2.5, 0.0, 0.0)];
        assert!(build_sigma(&pts, 1.0, &lam(3.0), &[], &tol())
            .unwrap()
            .is_none());
    }

    #[test]
    fn sampled_points_satisfy_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..30 {
            let left: Vec<Point3> = (0..rng.gen_range(1..8))
                .map(|_| rand_point(&mut rng, -0.6, 0.4, 0.6))
                .collect();
            let extra: Vec<Ball> = (0..rng.gen_range(0..3))
                .map(|_| Ball::new(rand_point(&mut rng, 0.6, 1.2, 0.3), 1.1))
                .collect();
            let l = lam(rng.gen_range(0.4..0.9));
            let Some(s) = build_sigma(&left, 1.1, &l, &extra, &tol()).unwrap() else {
                continue;
            };
            for w in sample_on_sigma(&s, &mut rng, 500) {
                for p in &left {
                    assert!(p.dist(w) <= 1.1 + 1e-9);
                }
                for b in &extra {
                    assert!(b.center.dist(w) <= 1.1 + 1e-9);
                }
                assert!(l.eval(w) <= 1e-9);
                // on the right part of some ball touching w
                assert!(left
                    .iter()
                    .any(|p| (p.dist(w) - 1.1).abs() < 1e-9 && w.x >= p.x - 1e-9));
                assert!(s.contains(w));
            }
        }
    }

    #[test]
    fn gamma_tangent_point() {
        let q = Point3::ORIGIN;
        let dir = Point3::new(0.2, 0.98, 0.0).normalized();
        let p = dir * 2.0;
        let s = build_sigma(&[q], 1.0, &lam(0.3), &[], &tol())
            .unwrap()
            .unwrap();
        let g = gamma_curve(0, p, &s);
        assert_eq!(g.pieces.len(), 1);
        assert!(g.pieces[0].is_point());
        assert!(g.pieces[0].arc.circle.center.dist(dir) < 1e-6);
        let far = gamma_curve(1, dir * 2.1, &s);
        assert!(far.is_empty());
    }

    #[test]
    fn gamma_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..40 {
            let (left, right, r, x) = instance(&mut rng, 12);
            let Some(s) = build_sigma(&left, r, &lam(x), &[], &tol()).unwrap() else {
                continue;
            };
            for (i, &p) in right.iter().enumerate() {
                let g = gamma_curve(i, p, &s);
                for piece in &g.pieces {
                    for k in 0..=8 {
                        let w = piece.arc.point_at_fraction(k as f64 / 8.0);
                        assert!((w.dist(p) - r).abs() < 1e-9);
                        assert!(s.contains(w));
                    }
                }
            }
        }
    }

    #[test]
    fn no_curves_gives_faces() {
        let s = build_sigma(&[Point3::ORIGIN], 1.0, &lam(0.5), &[], &tol())
            .unwrap()
            .unwrap();
        let m = build_map(&s, &[]).unwrap();
        assert_eq!(m.cells.len(), 1);
        assert_eq!(m.cells[0].cycles, 2);
        assert!(m.euler_ok());
        let t = grand_tour(&m);
        assert!(t.moves.iter().all(|m| m.toggled.is_none()));
    }

    #[test]
    fn one_curve_splits_face() {
        let s = build_sigma(&[Point3::ORIGIN], 1.0, &lam(0.5), &[], &tol())
            .unwrap()
            .unwrap();
        let p = Point3::new(0.6, 1.2, 0.0);
        let g = gamma_curve(7, p, &s);
        assert!(!g.is_empty());
        let m = build_map(&s, &[g]).unwrap();
        assert_eq!(m.cells.len(), 2);
        assert!(m.euler_ok());
        let sigs: Vec<&Vec<usize>> = m.cells.iter().map(|c| &c.uncovered).collect();
        assert!(sigs.contains(&&vec![]) && sigs.contains(&&vec![7]));
    }

    #[test]
    fn two_faces_tour() {
        let left = [Point3::new(0.0, -0.4, 0.0), Point3::new(0.0, 0.4, 0.0)];
        let s = build_sigma(&left, 1.0, &lam(0.5), &[], &tol())
            .unwrap()
            .unwrap();
        assert_eq!(s.faces.len(), 2);
        let m = build_map(&s, &[]).unwrap();
        assert_eq!(m.cells.len(), 2);
        let t = grand_tour(&m);
        let cells: std::collections::BTreeSet<_> = t
            .moves
            .iter()
            .filter_map(|m| {
                if let NodeRef::Cell(c) = m.node {
                    Some(c)
                } else {
                    None
                }
            })
            .collect();
        assert_eq!(cells.len(), 2);
        assert!(t.replay().iter().all(|u| u.is_empty()));
    }

    #[test]
    fn random_maps_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let mut built = 0;
        for _ in 0..40 {
            let (left, right, r, x) = instance(&mut rng, 14);
            let Some(s) = build_sigma(&left, r, &lam(x), &[], &tol()).unwrap() else {
                continue;
            };
            let curves: Vec<GammaCurve> = right
                .iter()
                .enumerate()
                .map(|(i, &p)| gamma_curve(i, p, &s))
                .collect();
            let m = build_map(&s, &curves).unwrap();
            built += 1;
            assert!(m.euler_ok(), "{:?}", m.topology);
            assert!(m.max_pair_arcs() <= PAIR_ARC_BOUND);
            // representatives agree with their signatures
            for c in &m.cells {
                if let Some(w) = c.rep {
                    let direct: Vec<usize> =
                        (0..right.len()).filter(|&i| right[i].dist(w) > r).collect();
                    assert_eq!(direct, c.uncovered);
                }
            }
            for e in &m.edges {
                let w = e.arc.midpoint();
                let direct: Vec<usize> = (0..right.len())
                    .filter(|&i| right[i].dist(w) > r + 1e-9)
                    .collect();
                assert_eq!(direct, e.uncovered);
            }
            // tour bookkeeping matches every evaluated node
            let t = grand_tour(&m);
            let replay = t.replay();
            let mut visited = std::collections::BTreeSet::new();
            for (mv, u) in t.moves.iter().zip(&replay) {
                if mv.evaluate {
                    assert_eq!(u.as_slice(), m.uncovered(mv.node));
                    visited.insert(mv.node);
                }
            }
            assert_eq!(visited.len(), m.node_count());
        }
        assert!(built > 20);
    }

    #[test]
    fn census_examples() {
        let r = 1.0;
        // |aq| = |bq| = 2r with q on the bisector of ab: C_ab meets ∂B_r(q)
        // only tangentially or not at all
        let a = Point3::new(1.0, -0.5, 0.0);
        let b = Point3::new(1.0, 0.5, 0.0);
        let h = (4.0f64 - 0.25).sqrt();
        let q = Point3::new(1.0 - h, 0.0, 0.0);
        match short_arc_census(a, b, q, r, &lam(0.0), &tol()) {
            Err(Error::NoIntersection) => {}
            Ok(c) => assert!(c.arc.span() > TAU - 1e-6),
            Err(e) => panic!("{e:?}"),
        }
        let far = short_arc_census(a, Point3::new(4.0, 0.0, 0.0), q, r, &lam(0.0), &tol());
        assert_eq!(far, Err(Error::NoIntersection));
    }

    #[test]
    fn short_arcs_have_a_right_endpoint() {
        let rep = random_arc_census(4000, 64, &tol());
        assert_eq!(rep.violations, 0);
        assert!(rep.short_arcs > 50, "{rep:?}");
    }
}
