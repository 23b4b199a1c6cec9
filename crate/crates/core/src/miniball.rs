//! Smallest enclosing ball (move-to-front Welzl) and the ball-intersection
//! feasibility oracle built on it.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{solve3, Point3, Tolerance};

/// Minimum ball around a point set, with the input indices that pin it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnclosingBall {
    pub center: Point3,
    pub radius: f64,
    pub support: Vec<usize>,
}

/// Outcome of asking whether equal-radius balls around `centers` meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntersectionStatus {
    Empty,
    /// The balls meet in (numerically) one point.
    Degenerate(Point3),
    /// The intersection has interior; the point is inside it.
    FullDim(Point3),
}

impl IntersectionStatus {
    pub fn is_empty(&self) -> bool {
        matches!(self, IntersectionStatus::Empty)
    }

    pub fn point(&self) -> Option<Point3> {
        match *self {
            IntersectionStatus::Empty => None,
            IntersectionStatus::Degenerate(p) | IntersectionStatus::FullDim(p) => Some(p),
        }
    }
}

const DEFAULT_SEED: u64 = 0x5eb;

/// Smallest enclosing ball with the default shuffle seed.
pub fn smallest_enclosing_ball(points: &[Point3]) -> Result<EnclosingBall> {
    smallest_enclosing_ball_seeded(points, DEFAULT_SEED)
}

pub fn smallest_enclosing_ball_seeded(points: &[Point3], seed: u64) -> Result<EnclosingBall> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    if points.len() > 8 {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    Ok(seb_indices(points, &mut order))
}

/// Smallest enclosing ball of `points[order[..]]`; `order` is permuted.
pub(crate) fn seb_indices(points: &[Point3], order: &mut [usize]) -> EnclosingBall {
    let mut support = Basis::default();
    let n = order.len();
    let (c, r2, basis) = mtf(points, order, n, &mut support);
    let radius = order
        .iter()
        .map(|&i| points[i].dist(c))
        .fold(r2.max(0.0).sqrt(), f64::max);
    let mut sup = basis.idx[..basis.len].to_vec();
    sup.sort_unstable();
    EnclosingBall {
        center: c,
        radius,
        support: sup,
    }
}

/// Smallest enclosing ball of a subset given by indices, without permuting the caller's data.
pub fn seb_of_subset(points: &[Point3], idx: &[usize]) -> Option<EnclosingBall> {
    if idx.is_empty() {
        return None;
    }
    let mut order = idx.to_vec();
    Some(seb_indices(points, &mut order))
}

#[inline]
fn outside(p: Point3, c: Point3, r2: f64) -> bool {
    p.dist2(c) > r2 * (1.0 + 1e-12) + 1e-300
}

#[derive(Clone, Copy, Default)]
struct Basis {
    idx: [usize; 4],
    len: usize,
}

fn mtf(
    points: &[Point3],
    order: &mut [usize],
    end: usize,
    support: &mut Basis,
) -> (Point3, f64, Basis) {
    let (mut c, mut r2) = ball_through(points, support);
    let mut basis = *support;
    if support.len == 4 {
        return (c, r2, basis);
    }
    for i in 0..end {
        let pi = order[i];
        if outside(points[pi], c, r2) {
            support.idx[support.len] = pi;
            support.len += 1;
            (c, r2, basis) = mtf(points, order, i, support);
            support.len -= 1;
            order[..=i].rotate_right(1);
        }
    }
    (c, r2, basis)
}

/// Smallest ball with all of `support` on its boundary. Affinely dependent
/// supports fall back to the best sub-support that still encloses them.
fn ball_through(points: &[Point3], support: &Basis) -> (Point3, f64) {
    let mut buf = [Point3::ORIGIN; 4];
    for k in 0..support.len {
        buf[k] = points[support.idx[k]];
    }
    let s = &buf[..support.len];
    if let Some(b) = circumball(s) {
        return b;
    }
    let mut best: Option<(Point3, f64)> = None;
    for skip in 0..s.len() {
        let sub: Vec<Point3> = s
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, &p)| p)
            .collect();
        if let Some((c, r2)) = circumball(&sub) {
            let r2 = s.iter().map(|p| p.dist2(c)).fold(r2, f64::max);
            if best.map_or(true, |b| r2 < b.1) {
                best = Some((c, r2));
            }
        }
    }
    best.unwrap_or_else(|| {
        // fully collapsed support: use the farthest pair
        let mut bp = (s[0], 0.0);
        for a in s {
            for b in s {
                let d = a.dist2(*b) / 4.0;
                if d > bp.1 {
                    bp = (a.midpoint(*b), d);
                }
            }
        }
        bp
    })
}

/// Circumball (center, squared radius) of 0..=4 affinely independent points.
pub(crate) fn circumball(s: &[Point3]) -> Option<(Point3, f64)> {
    match s.len() {
        0 => Some((Point3::ORIGIN, -1.0)),
        1 => Some((s[0], 0.0)),
        2 => {
            let c = s[0].midpoint(s[1]);
            Some((c, c.dist2(s[0])))
        }
        3 => {
            let u = s[1] - s[0];
            let v = s[2] - s[0];
            let w = u.cross(v);
            let w2 = w.norm2();
            if w2 <= 1e-24 * u.norm2() * v.norm2() || w2 == 0.0 {
                return None;
            }
            let off = (v * u.norm2() - u * v.norm2()).cross(w) / (2.0 * w2);
            let c = s[0] + off;
            Some((c, off.norm2()))
        }
        4 => {
            let a = s[0];
            let rows = [s[1] - a, s[2] - a, s[3] - a];
            let rhs = [
                rows[0].norm2() / 2.0,
                rows[1].norm2() / 2.0,
                rows[2].norm2() / 2.0,
            ];
            let off = solve3(rows, rhs)?;
            Some((a + off, off.norm2()))
        }
        _ => None,
    }
}

/// Classifies `∩ B_r(c_i)` as empty, a single point, or full-dimensional.
pub fn balls_intersection_status(
    centers: &[Point3],
    r: f64,
    tol: &Tolerance,
) -> IntersectionStatus {
    if centers.is_empty() {
        return IntersectionStatus::FullDim(Point3::ORIGIN);
    }
    let mut order: Vec<usize> = (0..centers.len()).collect();
    let seb = seb_indices(centers, &mut order);
    status_from_radius(seb.radius, seb.center, r, tol)
}

pub(crate) fn status_from_radius(
    seb_r: f64,
    center: Point3,
    r: f64,
    tol: &Tolerance,
) -> IntersectionStatus {
    match tol.cmp(seb_r, r) {
        1 => IntersectionStatus::Empty,
        0 => IntersectionStatus::Degenerate(center),
        _ => IntersectionStatus::FullDim(center),
    }
}

/// Sorted, deduplicated SEB radii of every subset of one to four points.
pub fn candidate_radii(points: &[Point3]) -> Vec<f64> {
    let n = points.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    out.push(0.0);
    let mut push = |idx: &[usize]| {
        if let Some(b) = seb_of_subset(points, idx) {
            out.push(b.radius);
        }
    };
    for a in 0..n {
        for b in a + 1..n {
            push(&[a, b]);
            for c in b + 1..n {
                push(&[a, b, c]);
                for d in c + 1..n {
                    push(&[a, b, c, d]);
                }
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    let tol = Tolerance::new(1e-12, 1e-12);
    out.dedup_by(|a, b| tol.eq(*a, *b));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect()
    }

    // exhaustive oracle: minimum circumball of <=4-subsets that contains everything
    fn subset_oracle(p: &[Point3]) -> f64 {
        let n = p.len();
        let mut best = f64::INFINITY;
        let mut consider = |s: &[Point3]| {
            if let Some((c, r2)) = circumball(s) {
                let r = r2.max(0.0).sqrt();
                if p.iter().all(|q| q.dist(c) <= r * (1.0 + 1e-10) + 1e-12) {
                    best = best.min(r);
                }
            }
        };
        for a in 0..n {
            consider(&[p[a]]);
            for b in a + 1..n {
                consider(&[p[a], p[b]]);
                for c in b + 1..n {
                    consider(&[p[a], p[b], p[c]]);
                    for d in c + 1..n {
                        consider(&[p[a], p[b], p[c], p[d]]);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn trivial_balls() {
        let b = smallest_enclosing_ball(&[Point3::ORIGIN]).unwrap();
        assert_eq!((b.center, b.radius), (Point3::ORIGIN, 0.0));
        let b = smallest_enclosing_ball(&[Point3::ORIGIN, Point3::new(2.0, 0.0, 0.0)]).unwrap();
        assert_eq!(b.center, Point3::new(1.0, 0.0, 0.0));
        assert_eq!(b.radius, 1.0);
        assert_eq!(smallest_enclosing_ball(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn regular_tetrahedron() {
        let s = 0.5f64;
        let h = (2.0f64 / 3.0).sqrt();
        let pts = [
            Point3::new(-s, -s / 3f64.sqrt(), 0.0),
            Point3::new(s, -s / 3f64.sqrt(), 0.0),
            Point3::new(0.0, 1.0 / 3f64.sqrt(), 0.0),
            Point3::new(0.0, 0.0, h),
        ];
        for i in 0..4 {
            for j in i + 1..4 {
                assert!((pts[i].dist(pts[j]) - 1.0).abs() < 1e-15);
            }
        }
        let b = smallest_enclosing_ball(&pts).unwrap();
        assert!(
            (b.radius - (3.0f64 / 8.0).sqrt()).abs() < 1e-12,
            "{}",
            b.radius
        );
        assert_eq!(b.support.len(), 4);
    }

    #[test]
    fn matches_subset_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(1..=12);
            let p = random_points(&mut rng, n);
            let b = smallest_enclosing_ball(&p).unwrap();
            let o = subset_oracle(&p);
            assert!(
                (b.radius - o).abs() <= 1e-9 * (1.0 + o),
                "{} vs {}",
                b.radius,
                o
            );
        }
    }

    #[test]
    fn containment_support_and_minimality() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let n = rng.gen_range(2..=100);
            let p = random_points(&mut rng, n);
            let b = smallest_enclosing_ball_seeded(&p, rng.gen()).unwrap();
            assert!(b.support.len() <= 4 && !b.support.is_empty());
            for q in &p {
                assert!(q.dist(b.center) <= b.radius + tol.slack(b.radius));
            }
            for &s in &b.support {
                assert!(
                    tol.eq(p[s].dist(b.center), b.radius)
                        || (p[s].dist(b.center) - b.radius).abs() < 1e-9
                );
            }
            if b.support.len() > 1 {
                for k in 0..b.support.len() {
                    let sub: Vec<usize> = b
                        .support
                        .iter()
                        .copied()
                        .filter(|&i| i != b.support[k])
                        .collect();
                    let r = seb_of_subset(&p, &sub).unwrap().radius;
                    assert!(r < b.radius - 1e-12, "support not minimal");
                }
            }
        }
    }

    #[test]
    fn monotone_under_insertion() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let n = rng.gen_range(2..=10);
            let p = random_points(&mut rng, n);
            let mut prev = 0.0;
            for k in 1..=n {
                let r = smallest_enclosing_ball(&p[..k]).unwrap().radius;
                assert!(r >= prev - 1e-12);
                prev = r;
            }
        }
    }

    #[test]
    fn intersection_status_examples() {
        let tol = Tolerance::default();
        let a = Point3::ORIGIN;
        assert_eq!(
            balls_intersection_status(&[a, Point3::new(2.0, 0.0, 0.0)], 1.0, &tol),
            IntersectionStatus::Degenerate(Point3::new(1.0, 0.0, 0.0))
        );
        assert_eq!(
            balls_intersection_status(&[a, Point3::new(2.1, 0.0, 0.0)], 1.0, &tol),
            IntersectionStatus::Empty
        );
    }

    #[test]
    fn intersection_status_feasibility_recheck() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..500 {
            let n = rng.gen_range(1..=10);
            let c = random_points(&mut rng, n);
            let r = rng.gen_range(0.2..1.6);
            let seb = smallest_enclosing_ball(&c).unwrap().radius;
            match balls_intersection_status(&c, r, &tol) {
                IntersectionStatus::Empty => assert!(seb > r),
                IntersectionStatus::Degenerate(w) | IntersectionStatus::FullDim(w) => {
                    assert!(seb <= r + tol.slack(r));
                    let m = c.iter().map(|q| q.dist(w)).fold(0.0, f64::max);
                    assert!(m <= r + tol.slack(r));
                }
            }
        }
    }

    #[test]
    fn candidate_radii_examples() {
        let c = candidate_radii(&[Point3::ORIGIN, Point3::new(2.0, 0.0, 0.0)]);
        assert_eq!(c, vec![0.0, 1.0]);
        let pts = [
            Point3::ORIGIN,
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(10.0, 0.0, 0.0),
            Point3::new(11.0, 0.0, 0.0),
        ];
        let c = candidate_radii(&pts);
        assert!(c.iter().any(|&r| (r - 0.5).abs() < 1e-15));
        assert!(c.iter().any(|&r| r > 4.0));
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }
}
