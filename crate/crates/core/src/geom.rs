//! Geometric primitives, tolerance policy, point–plane duality and the
//! canonical orientation set used by the separated-centers decision.

use std::f64::consts::{FRAC_PI_4, PI};
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hybrid absolute/relative comparison policy.
///
/// Two reals compare equal when `|a - b| <= eps_abs + eps_rel * max(|a|, |b|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps_abs: f64,
    pub eps_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eps_abs: 1e-9,
            eps_rel: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(eps_abs: f64, eps_rel: f64) -> Self {
        assert!(
            eps_abs >= 0.0 && eps_rel >= 0.0,
            "tolerances must be nonnegative"
        );
        Tolerance { eps_abs, eps_rel }
    }

    /// Allowed slack when comparing quantities of magnitude `scale`.
    #[inline]
    pub fn slack(&self, scale: f64) -> f64 {
        self.eps_abs + self.eps_rel * scale.abs()
    }

    #[inline]
    pub fn eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.slack(a.abs().max(b.abs()))
    }

    /// Sign of `a - b` with ties inside the tolerance band mapped to zero.
    #[inline]
    pub fn cmp(&self, a: f64, b: f64) -> i8 {
        if self.eq(a, b) {
            0
        } else if a > b {
            1
        } else {
            -1
        }
    }

    /// Sign of `value`, treating `|value| <= slack(scale)` as zero.
    #[inline]
    pub fn sign(&self, value: f64, scale: f64) -> i8 {
        if value.abs() <= self.slack(scale) {
            0
        } else if value > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// A point (or free vector) in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Free vectors share the point representation.
pub type Vec3 = Point3;

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    #[inline]
    pub fn dist(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn dist2(self, o: Point3) -> f64 {
        (self - o).norm2()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        self / n
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn midpoint(self, o: Point3) -> Point3 {
        (self + o) * 0.5
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl Index<usize> for Point3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("coordinate index {i} out of range"),
        }
    }
}

impl Add for Point3 {
    type Output = Point3;
    #[inline]
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Point3 {
    #[inline]
    fn add_assign(&mut self, o: Point3) {
        *self = *self + o;
    }
}

impl Sub for Point3 {
    type Output = Point3;
    #[inline]
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    #[inline]
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    #[inline]
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    #[inline]
    fn div(self, s: f64) -> Point3 {
        Point3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec3);

impl Direction {
    /// Normalizes `v`; panics on the zero vector.
    pub fn new(v: Vec3) -> Self {
        let n = v.norm();
        assert!(
            n > 0.0 && n.is_finite(),
            "direction from degenerate vector {v:?}"
        );
        Direction(v / n)
    }

    pub const X: Direction = Direction(Point3::new(1.0, 0.0, 0.0));
    pub const Y: Direction = Direction(Point3::new(0.0, 1.0, 0.0));
    pub const Z: Direction = Direction(Point3::new(0.0, 0.0, 1.0));

    #[inline]
    pub fn vec(self) -> Vec3 {
        self.0
    }

    pub fn angle_to(self, o: Direction) -> f64 {
        self.0.dot(o.0).clamp(-1.0, 1.0).acos()
    }

    pub fn flipped(self) -> Direction {
        Direction(-self.0)
    }

    /// Two in-plane axes `(u, v)` with `u × v = self`. The first axis is
    /// built from the coordinate axis along which `self` is smallest.
    pub fn frame(self) -> (Vec3, Vec3) {
        let n = self.0;
        let (ax, ay, az) = (n.x.abs(), n.y.abs(), n.z.abs());
        let pivot = if ax <= ay && ax <= az {
            Point3::new(1.0, 0.0, 0.0)
        } else if ay <= az {
            Point3::new(0.0, 1.0, 0.0)
        } else {
            Point3::new(0.0, 0.0, 1.0)
        };
        let u = (pivot - n * pivot.dot(n)).normalized();
        let v = n.cross(u);
        (u, v)
    }
}

/// Plane `{p : n·p = d}` with unit normal `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Direction,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Vec3, offset: f64) -> Self {
        let n = normal.norm();
        Plane {
            normal: Direction::new(normal),
            offset: offset / n,
        }
    }

    pub fn through(point: Point3, normal: Direction) -> Self {
        Plane {
            normal,
            offset: normal.vec().dot(point),
        }
    }

    /// Signed distance of `p` from the plane.
    #[inline]
    pub fn eval(&self, p: Point3) -> f64 {
        self.normal.vec().dot(p) - self.offset
    }

    pub fn flipped(&self) -> Plane {
        Plane {
            normal: self.normal.flipped(),
            offset: -self.offset,
        }
    }
}

/// Closed ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point3,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point3, radius: f64) -> Self {
        assert!(radius >= 0.0, "negative ball radius");
        Ball { center, radius }
    }

    pub fn contains(&self, p: Point3, tol: &Tolerance) -> bool {
        p.dist(self.center) <= self.radius + tol.slack(self.radius)
    }
}

/// Circle in 3-space: the points of the plane through `center` with the
/// given normal at distance `radius` from `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle3 {
    pub center: Point3,
    pub radius: f64,
    pub normal: Direction,
}

impl Circle3 {
    pub fn axes(&self) -> (Vec3, Vec3) {
        self.normal.frame()
    }

    pub fn point_at(&self, theta: f64) -> Point3 {
        let (u, v) = self.axes();
        self.center + (u * theta.cos() + v * theta.sin()) * self.radius
    }

    /// Unit tangent in the direction of increasing angle.
    pub fn tangent_at(&self, theta: f64) -> Vec3 {
        let (u, v) = self.axes();
        v * theta.cos() - u * theta.sin()
    }

    /// Angle of the projection of `p` into the circle plane, in `[0, 2π)`.
    pub fn angle_of(&self, p: Point3) -> f64 {
        let (u, v) = self.axes();
        let d = p - self.center;
        let a = d.dot(v).atan2(d.dot(u));
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }
}

/// Arc of a circle covering angles `[theta0, theta1)` in the circle's frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc3 {
    pub circle: Circle3,
    pub theta0: f64,
    pub theta1: f64,
}

impl Arc3 {
    pub fn new(circle: Circle3, theta0: f64, theta1: f64) -> Self {
        let span = theta1 - theta0;
        assert!(
            (-1e-12..=2.0 * PI + 1e-12).contains(&span),
            "arc span {span} outside [0, 2π]"
        );
        Arc3 {
            circle,
            theta0,
            theta1,
        }
    }

    pub fn full(circle: Circle3) -> Self {
        Arc3 {
            circle,
            theta0: 0.0,
            theta1: 2.0 * PI,
        }
    }

    pub fn span(&self) -> f64 {
        self.theta1 - self.theta0
    }

    pub fn is_full(&self) -> bool {
        self.span() >= 2.0 * PI - 1e-12
    }

    pub fn point_at_fraction(&self, t: f64) -> Point3 {
        self.circle.point_at(self.theta0 + t * self.span())
    }

    pub fn start(&self) -> Point3 {
        self.circle.point_at(self.theta0)
    }

    pub fn end(&self) -> Point3 {
        self.circle.point_at(self.theta1)
    }

    pub fn midpoint(&self) -> Point3 {
        self.point_at_fraction(0.5)
    }
}

/// Orthonormal frame whose first axis is a chosen orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub axes: [Vec3; 3],
}

impl Frame {
    pub fn with_x_axis(d: Direction) -> Self {
        let (u, v) = d.frame();
        Frame {
            axes: [d.vec(), u, v],
        }
    }

    pub fn identity() -> Self {
        Frame {
            axes: [Direction::X.vec(), Direction::Y.vec(), Direction::Z.vec()],
        }
    }

    /// World coordinates to frame coordinates.
    pub fn to_local(&self, p: Point3) -> Point3 {
        Point3::new(
            self.axes[0].dot(p),
            self.axes[1].dot(p),
            self.axes[2].dot(p),
        )
    }

    /// Frame coordinates back to world coordinates.
    pub fn to_world(&self, p: Point3) -> Point3 {
        self.axes[0] * p.x + self.axes[1] * p.y + self.axes[2] * p.z
    }
}

/// Maps `(x, y, z)` to the plane `w = x·u + y·v − z` in `(u, v, w)`-space.
///
/// The returned normal always has a positive `w` component, so `side = +1`
/// reads as "above" in both spaces.
pub fn dualize_point(p: Point3) -> Plane {
    Plane::new(Point3::new(-p.x, -p.y, 1.0), -p.z)
}

/// Inverse of [`dualize_point`]: the plane `w = a·u + b·v + c` maps to `(a, b, −c)`.
pub fn dualize_plane(h: &Plane) -> Result<Point3> {
    let n = h.normal.vec();
    if n.z.abs() <= 1e-12 {
        return Err(Error::VerticalPlane);
    }
    let a = -n.x / n.z;
    let b = -n.y / n.z;
    let c = h.offset / n.z;
    Ok(Point3::new(a, b, -c))
}

/// Sign of `n·p − d` under the tolerance; `0` means on the plane.
pub fn side_of_plane(p: Point3, h: &Plane, tol: &Tolerance) -> i8 {
    let scale = h.offset.abs().max(p.max_abs());
    tol.sign(h.eval(p), scale)
}

/// How two sphere boundaries meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereContact {
    Circle(Circle3),
    TangentPoint(Point3),
    Disjoint,
    Nested,
}

/// Intersection of the boundaries of two balls.
pub fn sphere_sphere_intersect(a: &Ball, b: &Ball, tol: &Tolerance) -> Result<SphereContact> {
    let delta = b.center - a.center;
    let d = delta.norm();
    let scale = a
        .radius
        .max(b.radius)
        .max(a.center.max_abs())
        .max(b.center.max_abs());
    if d <= tol.slack(scale) {
        if tol.eq(a.radius, b.radius) {
            return Err(Error::ConcentricEqual);
        }
        return Ok(SphereContact::Nested);
    }
    let u = delta / d;
    let sum = a.radius + b.radius;
    let diff = (a.radius - b.radius).abs();
    if tol.eq(d, sum) {
        return Ok(SphereContact::TangentPoint(a.center + u * a.radius));
    }
    if d > sum {
        return Ok(SphereContact::Disjoint);
    }
    if tol.eq(d, diff) {
        let dir = if a.radius >= b.radius { u } else { -u };
        return Ok(SphereContact::TangentPoint(a.center + dir * a.radius));
    }
    if d < diff {
        return Ok(SphereContact::Nested);
    }
    let t = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d);
    let rho = (a.radius * a.radius - t * t).max(0.0).sqrt();
    Ok(SphereContact::Circle(Circle3 {
        center: a.center + u * t,
        radius: rho,
        normal: Direction::new(u),
    }))
}

/// Angular resolution `α` of the orientation set for separation ratio `β`.
pub fn alpha_for_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::InvalidBeta(beta));
    }
    let a = (beta / 4.0).acos() - (beta / 2.0).acos();
    Ok(a.min(FRAC_PI_4))
}

/// Bound constant `C` in `|D| <= C / α²` for [`canonical_directions`].
pub const DIRECTION_COUNT_CONSTANT: f64 = 48.0;

/// Latitude/longitude grid of unit vectors covering the sphere at angular
/// resolution `α(β)`: every unit vector lies within `α` of some member.
pub fn canonical_directions(beta: f64) -> Result<Vec<Direction>> {
    let alpha = alpha_for_beta(beta)?;
    Ok(direction_grid(alpha))
}

pub(crate) fn direction_grid(alpha: f64) -> Vec<Direction> {
    // a point is at most delta/2 from its band along a meridian and at most
    // delta/2 from a grid longitude along its parallel, so the covering
    // radius is at most delta < alpha
    let delta = alpha / std::f64::consts::SQRT_2;
    let bands = (PI / delta).ceil() as usize;
    let h = PI / bands as f64;
    let mut out = Vec::new();
    for k in 0..bands {
        let lo = -PI / 2.0 + k as f64 * h;
        let hi = lo + h;
        let center = 0.5 * (lo + hi);
        let near_equator = if lo <= 0.0 && hi >= 0.0 {
            0.0
        } else {
            lo.abs().min(hi.abs())
        };
        let count = ((2.0 * PI * near_equator.cos() / delta).ceil() as usize).max(1);
        for j in 0..count {
            let lon = 2.0 * PI * j as f64 / count as f64;
            out.push(Direction::new(Point3::new(
                center.cos() * lon.cos(),
                center.cos() * lon.sin(),
                center.sin(),
            )));
        }
    }
    out
}

/// Solves the 3×3 system `rows · x = rhs`; `None` when (near) singular.
pub fn solve3(rows: [Vec3; 3], rhs: [f64; 3]) -> Option<Point3> {
    let det = rows[0].dot(rows[1].cross(rows[2]));
    let scale = rows[0].norm() * rows[1].norm() * rows[2].norm();
    if det.abs() <= 1e-13 * scale || scale == 0.0 {
        return None;
    }
    let c0 = rows[1].cross(rows[2]);
    let c1 = rows[2].cross(rows[0]);
    let c2 = rows[0].cross(rows[1]);
    Some((c0 * rhs[0] + c1 * rhs[1] + c2 * rhs[2]) / det)
}

/// Intersection points of the line `{m1·w = h1, m2·w = h2}` with the sphere
/// `|w − c| = r` (0, 1 or 2 points; one point on tangency within `tol`).
pub fn planes_sphere_points(
    m1: Vec3,
    h1: f64,
    m2: Vec3,
    h2: f64,
    center: Point3,
    r: f64,
    tol: &Tolerance,
) -> Vec<Point3> {
    let dir = m1.cross(m2);
    let dn = dir.norm();
    if dn <= 1e-12 * m1.norm() * m2.norm() {
        return Vec::new();
    }
    let Some(p0) = solve3([m1, m2, dir], [h1, h2, dir.dot(center)]) else {
        return Vec::new();
    };
    let u = dir / dn;
    let off = p0 - center;
    let dist2 = off.norm2();
    let disc = r * r - dist2;
    let slack = tol.slack(r) * r;
    if disc < -2.0 * slack {
        Vec::new()
    } else if disc <= 2.0 * slack {
        vec![p0]
    } else {
        let s = disc.sqrt();
        vec![p0 - u * s, p0 + u * s]
    }
}
