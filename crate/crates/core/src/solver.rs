//! Decision procedures and optimisation drivers for the 2-center problem.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{build_cutting, build_tour, classify_planes, enumerate_cells, Cell};
use crate::error::{Error, Result};
use crate::geom::{
    canonical_directions, dualize_point, Ball, Direction, Plane, Point3, Tolerance, Vec3,
};
use crate::lifespan::{
    evaluate_leaves, evaluate_leaves_where, spans_from_toggles, LeafStatus, MiniballPredicate,
    PolytopePredicate, SpanTree,
};
use crate::miniball::{
    candidate_radii, seb_of_subset, smallest_enclosing_ball, status_from_radius, EnclosingBall,
};
use crate::surface_map::{build_map, build_sigma, gamma_curve, grand_tour, GammaCurve, MapM};

/// Below this separation ratio the improved decision falls back to the
/// arrangement-based one.
pub const IMPROVED_BETA_FLOOR: f64 = 0.05;

/// Exponential search gives up after this many halvings and uses `r0`.
const MAX_SEARCH_STEPS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    StrictlyCoverable,
    ExactlyCritical,
    NotCoverable,
}

impl Outcome {
    pub fn is_coverable(self) -> bool {
        self != Outcome::NotCoverable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::StrictlyCoverable => "strictly_coverable",
            Outcome::ExactlyCritical => "exactly_critical",
            Outcome::NotCoverable => "not_coverable",
        }
    }
}

/// Result of one decision query. `partition[i]` is `true` for points
/// assigned to the second ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub outcome: Outcome,
    pub centers: Option<(Point3, Point3)>,
    pub partition: Option<Vec<bool>>,
}

impl DecisionOutcome {
    pub fn not_coverable() -> Self {
        DecisionOutcome {
            outcome: Outcome::NotCoverable,
            centers: None,
            partition: None,
        }
    }

    fn rank(&self) -> u8 {
        match self.outcome {
            Outcome::StrictlyCoverable => 2,
            Outcome::ExactlyCritical => 1,
            Outcome::NotCoverable => 0,
        }
    }

    fn keep_better(&mut self, other: DecisionOutcome) {
        if other.rank() > self.rank() {
            *self = other;
        }
    }
}

/// Work counters reported by the decision procedures.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideStats {
    pub cells: usize,
    pub leaves: usize,
    pub guesses: usize,
    pub map_vertices: usize,
    /// Largest number of common vertices of two curves on one map.
    pub max_pair_hits: usize,
    /// Largest number of arcs of one pairwise intersection circle on `σ`.
    pub max_pair_arcs: usize,
    pub perturbed: bool,
}

impl DecideStats {
    fn absorb(&mut self, o: &DecideStats) {
        self.cells += o.cells;
        self.leaves += o.leaves;
        self.guesses += o.guesses;
        self.map_vertices += o.map_vertices;
        self.max_pair_hits = self.max_pair_hits.max(o.max_pair_hits);
        self.max_pair_arcs = self.max_pair_arcs.max(o.max_pair_arcs);
        self.perturbed |= o.perturbed;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Cubic,
    Improved,
    Bruteforce,
    Auto,
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cubic" => Ok(Algorithm::Cubic),
            "improved" => Ok(Algorithm::Improved),
            "bruteforce" => Ok(Algorithm::Bruteforce),
            "auto" => Ok(Algorithm::Auto),
            _ => Err(format!("unknown algorithm {s:?}")),
        }
    }
}

/// Emptiness oracle used at span-tree leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafOracle {
    Miniball,
    Polytope,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Approximation parameter; `0` asks for the exact optimum.
    pub epsilon: f64,
    /// Cutting parameter for the optimisation recursion.
    pub rho: usize,
    /// Number of cutting levels compressed into one (`ρ^levels`).
    pub levels: u32,
    pub seed: u64,
    pub tol: Tolerance,
    pub leaf_oracle: LeafOracle,
    /// Snap query radii lying within a few tolerances of a candidate radius
    /// onto it before classifying.
    pub snap: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algorithm: Algorithm::Auto,
            epsilon: 0.0,
            rho: 4,
            levels: 1,
            seed: 0,
            tol: Tolerance::default(),
            leaf_oracle: LeafOracle::Miniball,
            snap: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveMeta {
    pub algorithm: String,
    pub seed: u64,
    pub r0: f64,
    /// Radius found by the exponential search and its step index.
    pub search_radius: f64,
    pub search_steps: u32,
    /// Separation ratio bound at the search radius.
    pub beta: f64,
    pub decisions: usize,
    pub subproblems: usize,
    /// Subproblems solved by direct enumeration because no cutting of their
    /// (degenerate) dual planes could be built.
    pub exhaustive_fallbacks: usize,
    pub stats: DecideStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoCenterSolution {
    pub c1: Point3,
    pub c2: Point3,
    pub radius: f64,
    /// `true` for points covered by the ball at `c2`.
    pub partition: Vec<bool>,
    pub meta: SolveMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolveResult {
    Exact(TwoCenterSolution),
    /// The smallest enclosing ball already is a `(1 + ε)`-approximation.
    ApproximateBySeb {
        ball: EnclosingBall,
        meta: SolveMeta,
    },
}

impl SolveResult {
    pub fn radius(&self) -> f64 {
        match self {
            SolveResult::Exact(s) => s.radius,
            SolveResult::ApproximateBySeb { ball, .. } => ball.radius,
        }
    }

    pub fn meta(&self) -> &SolveMeta {
        match self {
            SolveResult::Exact(s) => &s.meta,
            SolveResult::ApproximateBySeb { meta, .. } => meta,
        }
    }
}

/// Points forced to the first ball (`minus`), forced to the second
/// (`plus`), and still free (`zero`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Split {
    pub minus: Vec<usize>,
    pub plus: Vec<usize>,
    pub zero: Vec<usize>,
}

impl Split {
    pub fn free(n: usize) -> Self {
        Split {
            minus: Vec::new(),
            plus: Vec::new(),
            zero: (0..n).collect(),
        }
    }
}

/// Lower bound on `|c1 c2| / r` over all coverings at radius `r`, clamped
/// to `[0, 2]`.
pub fn beta_lower_bound(r: f64, r0: f64) -> Result<f64> {
    if !(r > 0.0) || r > r0 {
        return Err(Error::InvalidRadius { r, r0 });
    }
    Ok((2.0 * (r0 / r - 1.0)).clamp(0.0, 2.0))
}

fn diameter_scale(points: &[Point3]) -> f64 {
    let Some(&p0) = points.first() else {
        return 1.0;
    };
    points
        .iter()
        .map(|p| p.dist(p0))
        .fold(0.0, f64::max)
        .max(1e-300)
}

fn side_status(
    points: &[Point3],
    idx: &[usize],
    r: f64,
    tol: &Tolerance,
) -> (LeafStatus, Option<Point3>) {
    match seb_of_subset(points, idx) {
        None => (LeafStatus::Unconstrained, None),
        Some(b) => (
            status_from_radius(b.radius, b.center, r, tol).into(),
            Some(b.center),
        ),
    }
}

/// Classifies the bipartition `(a, b)` at radius `r`.
fn judge(points: &[Point3], part: &[bool], r: f64, tol: &Tolerance) -> DecisionOutcome {
    let (a, b): (Vec<usize>, Vec<usize>) = (0..points.len()).partition(|&i| !part[i]);
    let (sa, ca) = side_status(points, &a, r, tol);
    let (sb, cb) = side_status(points, &b, r, tol);
    let outcome = if sa.is_full() && sb.is_full() {
        Outcome::StrictlyCoverable
    } else if sa.is_nonempty() && sb.is_nonempty() {
        Outcome::ExactlyCritical
    } else {
        return DecisionOutcome::not_coverable();
    };
    let ca = ca.or(cb).unwrap_or(Point3::ORIGIN);
    let cb = cb.unwrap_or(ca);
    DecisionOutcome {
        outcome,
        centers: Some((ca, cb)),
        partition: Some(part.to_vec()),
    }
}

// ---------------------------------------------------------------------------
// Exhaustive reference

fn sep1(ts: &[f64], eps: f64) -> Vec<Vec<bool>> {
    let m = ts.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
    let mut out = vec![vec![false; m], vec![true; m]];
    for k in 1..m {
        if ts[order[k]] - ts[order[k - 1]] <= eps {
            continue;
        }
        let mut v = vec![false; m];
        for &i in &order[..k] {
            v[i] = true;
        }
        out.push(v.iter().map(|b| !b).collect());
        out.push(v);
    }
    out
}

fn sep2(pts: &[(f64, f64)], eps: f64) -> Vec<Vec<bool>> {
    let m = pts.len();
    let d = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    if m == 0 {
        return vec![Vec::new()];
    }
    let far = (0..m)
        .max_by(|&a, &b| d(pts[0], pts[a]).total_cmp(&d(pts[0], pts[b])))
        .unwrap();
    let len = d(pts[0], pts[far]);
    if len <= eps {
        return vec![vec![false; m], vec![true; m]];
    }
    let dir = ((pts[far].0 - pts[0].0) / len, (pts[far].1 - pts[0].1) / len);
    let off =
        |o: (f64, f64), dir: (f64, f64), p: (f64, f64)| -dir.1 * (p.0 - o.0) + dir.0 * (p.1 - o.1);
    let along =
        |o: (f64, f64), dir: (f64, f64), p: (f64, f64)| dir.0 * (p.0 - o.0) + dir.1 * (p.1 - o.1);
    if pts.iter().all(|&p| off(pts[0], dir, p).abs() <= eps) {
        let ts: Vec<f64> = pts.iter().map(|&p| along(pts[0], dir, p)).collect();
        return sep1(&ts, eps);
    }
    let mut out = vec![vec![false; m], vec![true; m]];
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for i in 0..m {
        for j in i + 1..m {
            let l = d(pts[i], pts[j]);
            if l <= eps {
                continue;
            }
            let dir = ((pts[j].0 - pts[i].0) / l, (pts[j].1 - pts[i].1) / l);
            let s: Vec<f64> = pts.iter().map(|&p| off(pts[i], dir, p)).collect();
            let on: Vec<usize> = (0..m).filter(|&k| s[k].abs() <= eps).collect();
            if !seen.insert(on.clone()) {
                continue;
            }
            let ts: Vec<f64> = on.iter().map(|&k| along(pts[i], dir, pts[k])).collect();
            for sub in sep1(&ts, eps) {
                let mut v: Vec<bool> = s.iter().map(|&x| x > eps).collect();
                for (&k, &b) in on.iter().zip(&sub) {
                    v[k] = b;
                }
                out.push(v.iter().map(|b| !b).collect());
                out.push(v);
            }
        }
    }
    out
}

fn sep3(pts: &[Point3], eps: f64) -> Vec<Vec<bool>> {
    let m = pts.len();
    if m == 0 {
        return vec![Vec::new()];
    }
    // affine rank: if everything is coplanar, work in that plane
    let far = (0..m)
        .max_by(|&a, &b| pts[0].dist(pts[a]).total_cmp(&pts[0].dist(pts[b])))
        .unwrap();
    if pts[0].dist(pts[far]) <= eps {
        return vec![vec![false; m], vec![true; m]];
    }
    let e1 = (pts[far] - pts[0]).normalized();
    let line_dist = |p: Point3| {
        let w = p - pts[0];
        (w - e1 * w.dot(e1)).norm()
    };
    let third = (0..m)
        .max_by(|&a, &b| line_dist(pts[a]).total_cmp(&line_dist(pts[b])))
        .unwrap();
    if line_dist(pts[third]) <= eps {
        let ts: Vec<f64> = pts.iter().map(|&p| (p - pts[0]).dot(e1)).collect();
        return sep1(&ts, eps);
    }
    let nrm = e1.cross(pts[third] - pts[0]).normalized();
    if pts.iter().all(|&p| (p - pts[0]).dot(nrm).abs() <= eps) {
        let e2 = nrm.cross(e1);
        let p2: Vec<(f64, f64)> = pts
            .iter()
            .map(|&p| ((p - pts[0]).dot(e1), (p - pts[0]).dot(e2)))
            .collect();
        return sep2(&p2, eps);
    }
    let mut out = vec![vec![false; m], vec![true; m]];
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let u = pts[j] - pts[i];
                let n = u.cross(pts[k] - pts[i]);
                if n.norm() <= eps * u.norm().max(eps) {
                    continue;
                }
                let n = n.normalized();
                let s: Vec<f64> = pts.iter().map(|&p| (p - pts[i]).dot(n)).collect();
                let on: Vec<usize> = (0..m).filter(|&l| s[l].abs() <= eps).collect();
                if !seen.insert(on.clone()) {
                    continue;
                }
                let e1 = u.normalized();
                let e2 = n.cross(e1);
                let p2: Vec<(f64, f64)> = on
                    .iter()
                    .map(|&l| ((pts[l] - pts[i]).dot(e1), (pts[l] - pts[i]).dot(e2)))
                    .collect();
                for sub in sep2(&p2, eps) {
                    let mut v: Vec<bool> = s.iter().map(|&x| x > eps).collect();
                    for (&l, &b) in on.iter().zip(&sub) {
                        v[l] = b;
                    }
                    out.push(v.iter().map(|b| !b).collect());
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Every bipartition of `points` realisable by a plane (points on the plane
/// may go either way as long as a slight tilt separates them), normalised so
/// that point 0 is on the `false` side.
pub fn separable_bipartitions(points: &[Point3], tol: &Tolerance) -> Vec<Vec<bool>> {
    let eps = tol.slack(diameter_scale(points));
    let mut set: HashSet<Vec<bool>> = HashSet::new();
    for mut v in sep3(points, eps) {
        if v.first() == Some(&true) {
            v.iter_mut().for_each(|b| *b = !*b);
        }
        set.insert(v);
    }
    let mut out: Vec<Vec<bool>> = set.into_iter().collect();
    out.sort();
    out
}

/// Exhaustive decision and optimisation over all separable bipartitions,
/// with both sides' enclosing balls precomputed.
pub struct BruteForce {
    parts: Vec<(Vec<bool>, Option<EnclosingBall>, Option<EnclosingBall>)>,
    tol: Tolerance,
}

impl BruteForce {
    pub fn new(points: &[Point3], tol: &Tolerance) -> Self {
        let parts = separable_bipartitions(points, tol)
            .into_iter()
            .map(|part| {
                let (a, b): (Vec<usize>, Vec<usize>) = (0..points.len()).partition(|&i| !part[i]);
                let (ba, bb) = (seb_of_subset(points, &a), seb_of_subset(points, &b));
                (part, ba, bb)
            })
            .collect();
        BruteForce { parts, tol: *tol }
    }

    pub fn bipartition_count(&self) -> usize {
        self.parts.len()
    }

    fn side(b: &Option<EnclosingBall>, r: f64, tol: &Tolerance) -> LeafStatus {
        b.as_ref().map_or(LeafStatus::Unconstrained, |b| {
            status_from_radius(b.radius, b.center, r, tol).into()
        })
    }

    pub fn decide(&self, r: f64) -> DecisionOutcome {
        let mut best = DecisionOutcome::not_coverable();
        for (part, ba, bb) in &self.parts {
            let (sa, sb) = (Self::side(ba, r, &self.tol), Self::side(bb, r, &self.tol));
            let outcome = if sa.is_full() && sb.is_full() {
                Outcome::StrictlyCoverable
            } else if sa.is_nonempty() && sb.is_nonempty() {
                Outcome::ExactlyCritical
            } else {
                continue;
            };
            let ca = ba
                .as_ref()
                .or(bb.as_ref())
                .map_or(Point3::ORIGIN, |b| b.center);
            let cb = bb.as_ref().map_or(ca, |b| b.center);
            best.keep_better(DecisionOutcome {
                outcome,
                centers: Some((ca, cb)),
                partition: Some(part.clone()),
            });
            if best.outcome == Outcome::StrictlyCoverable {
                break;
            }
        }
        best
    }

    /// Minimum over bipartitions of the larger enclosing radius.
    pub fn optimum(&self) -> (f64, usize) {
        let rad = |b: &Option<EnclosingBall>| b.as_ref().map_or(0.0, |b| b.radius);
        self.parts
            .iter()
            .enumerate()
            .map(|(i, (_, a, b))| (rad(a).max(rad(b)), i))
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .unwrap_or((0.0, 0))
    }
}

/// Decides coverability at radius `r` by checking every separable
/// bipartition.
pub fn brute_force_decide(points: &[Point3], r: f64, tol: &Tolerance) -> DecisionOutcome {
    BruteForce::new(points, tol).decide(r)
}

/// Exact optimum by binary search over the candidate radii with the
/// exhaustive decision.
pub fn optimize_reference(points: &[Point3], tol: &Tolerance) -> Result<TwoCenterSolution> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let bf = BruteForce::new(points, tol);
    let radii = candidate_radii(points);
    // smallest candidate at which some bipartition is (at least) critical
    let (mut lo, mut hi) = (0usize, radii.len() - 1);
    let mut decisions = 0;
    while lo < hi {
        let mid = (lo + hi) / 2;
        decisions += 1;
        if bf.decide(radii[mid]).outcome.is_coverable() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let (_, best) = bf.optimum();
    let (part, ba, bb) = &bf.parts[best];
    let c1 = ba.as_ref().or(bb.as_ref()).map_or(points[0], |b| b.center);
    let c2 = bb.as_ref().map_or(c1, |b| b.center);
    Ok(TwoCenterSolution {
        c1,
        c2,
        radius: radii[lo],
        partition: part.clone(),
        meta: SolveMeta {
            algorithm: "bruteforce".into(),
            decisions,
            ..Default::default()
        },
    })
}

// ---------------------------------------------------------------------------
// Arrangement-based decision

/// Cells of the dual arrangement of `pts`, jittering copies of the points
/// when the arrangement is degenerate. Only the combinatorics use the
/// jittered copies.
fn dual_cells(pts: &[Point3], seed: u64, tol: &Tolerance) -> Result<(Vec<Cell>, bool)> {
    let scale = diameter_scale(pts);
    let centroid = pts.iter().fold(Point3::ORIGIN, |a, &p| a + p) * (1.0 / pts.len().max(1) as f64);
    let norm: Vec<Point3> = pts
        .iter()
        .map(|&p| (p - centroid) * (1.0 / scale))
        .collect();
    let planes: Vec<Plane> = norm.iter().map(|&p| dualize_point(p)).collect();
    match enumerate_cells(&planes, tol) {
        Err(Error::DegenerateArrangement) => {}
        other => return other.map(|c| (c, false)),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d00d);
    let mut mag = 1e-7;
    while mag <= 1e-4 * (1.0 + 1e-9) {
        let jit: Vec<Plane> = norm
            .iter()
            .map(|&p| {
                let d = Point3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                dualize_point(p + d * mag)
            })
            .collect();
        match enumerate_cells(&jit, tol) {
            Err(Error::DegenerateArrangement) => mag *= 10.0,
            other => return other.map(|c| (c, true)),
        }
    }
    Err(Error::DegenerateArrangement)
}

fn run_tree(
    tree: &SpanTree,
    points: &[Point3],
    r: f64,
    tol: &Tolerance,
    oracle: LeafOracle,
) -> Vec<LeafStatus> {
    match oracle {
        LeafOracle::Miniball => evaluate_leaves(tree, &mut MiniballPredicate::new(points, r, *tol)),
        LeafOracle::Polytope => evaluate_leaves(tree, &mut PolytopePredicate::new(points, r, *tol)),
    }
}

fn decide_cubic_split(
    points: &[Point3],
    r: f64,
    split: &Split,
    cfg: &SolverConfig,
    stats: &mut DecideStats,
) -> Result<DecisionOutcome> {
    let n = points.len();
    let tol = &cfg.tol;
    let zpts: Vec<Point3> = split.zero.iter().map(|&i| points[i]).collect();
    let (cells, perturbed) = dual_cells(&zpts, cfg.seed, tol)?;
    stats.perturbed |= perturbed;
    stats.cells += cells.len();
    let tour = build_tour(&cells)?;
    let len = tour.len();
    stats.leaves += len;
    let mut initial = vec![false; n];
    for &i in &split.plus {
        initial[i] = true;
    }
    let first = &cells[tour.steps[0].cell];
    for (k, &i) in split.zero.iter().enumerate() {
        initial[i] = first.signs[k] > 0;
    }
    let toggles: Vec<Option<usize>> = tour
        .steps
        .iter()
        .map(|s| s.toggled.map(|k| split.zero[k]))
        .collect();
    let (inside, outside) = spans_from_toggles(&initial, &toggles);
    let plus_tree = SpanTree::build(&inside, len)?;
    let minus_tree = SpanTree::build(&outside, len)?;
    let sp = run_tree(&plus_tree, points, r, tol, cfg.leaf_oracle);
    let sm = run_tree(&minus_tree, points, r, tol, cfg.leaf_oracle);
    let mut best: Option<usize> = None;
    let mut outcome = Outcome::NotCoverable;
    for t in 0..len {
        if sp[t].is_full() && sm[t].is_full() {
            best = Some(t);
            outcome = Outcome::StrictlyCoverable;
            break;
        }
        if best.is_none() && sp[t].is_nonempty() && sm[t].is_nonempty() {
            best = Some(t);
            outcome = Outcome::ExactlyCritical;
        }
    }
    let Some(t) = best else {
        return Ok(DecisionOutcome::not_coverable());
    };
    let cell = &cells[tour.steps[t].cell];
    let mut part = vec![false; n];
    for &i in &split.plus {
        part[i] = true;
    }
    for (k, &i) in split.zero.iter().enumerate() {
        part[i] = cell.signs[k] > 0;
    }
    let mut d = judge(points, &part, r, tol);
    // the leaf classification is authoritative; judge only supplies centers
    d.outcome = outcome;
    Ok(d)
}

/// Decision by sweeping the cells of the dual arrangement and evaluating
/// both sides of each cell with life-span trees.
pub fn decide_cubic(points: &[Point3], r: f64, cfg: &SolverConfig) -> Result<DecisionOutcome> {
    decide_cubic_split(
        points,
        r,
        &Split::free(points.len()),
        cfg,
        &mut DecideStats::default(),
    )
}

// ---------------------------------------------------------------------------
// Surface-map decision

// exact check when the extent along `xs` exceeds what two balls can span:
// the partition is then a prefix in `xs` order with a positive gap
fn prefix_sweep(
    points: &[Point3],
    xs: &[f64],
    r: f64,
    split: &Split,
    tol: &Tolerance,
) -> DecisionOutcome {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut forced = vec![0i8; n];
    split.minus.iter().for_each(|&i| forced[i] = -1);
    split.plus.iter().for_each(|&i| forced[i] = 1);
    let mut best = DecisionOutcome::not_coverable();
    for k in 0..=n {
        if k > 0 && k < n && xs[order[k]] <= xs[order[k - 1]] {
            continue;
        }
        for prefix_is_second in [false, true] {
            let mut part = vec![!prefix_is_second; n];
            for &i in &order[..k] {
                part[i] = prefix_is_second;
            }
            if (0..n).any(|i| forced[i] != 0 && part[i] != (forced[i] > 0)) {
                continue;
            }
            best.keep_better(judge(points, &part, r, tol));
            if best.outcome == Outcome::StrictlyCoverable {
                return best;
            }
        }
    }
    best
}

fn decide_improved_split(
    points: &[Point3],
    r: f64,
    beta: f64,
    split: &Split,
    cfg: &SolverConfig,
    stats: &mut DecideStats,
) -> Result<DecisionOutcome> {
    let n = points.len();
    let tol = &cfg.tol;
    // one ball suffices: answer directly
    let mut best = DecisionOutcome::not_coverable();
    if split.plus.is_empty() || split.minus.is_empty() {
        best.keep_better(judge(points, &vec![!split.plus.is_empty(); n], r, tol));
        if best.outcome == Outcome::StrictlyCoverable {
            return Ok(best);
        }
    }
    let dirs = canonical_directions(beta)?;
    let step = beta * r / 4.0;
    let mut is_plus = vec![false; n];
    split.plus.iter().for_each(|&i| is_plus[i] = true);
    let mut is_minus = vec![false; n];
    split.minus.iter().for_each(|&i| is_minus[i] = true);
    for v in dirs {
        let vv: Vec3 = v.vec();
        let xs: Vec<f64> = points.iter().map(|p| p.dot(vv)).collect();
        let xmin = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let xmax = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if xmax - xmin > 5.0 * r {
            stats.guesses += 1;
            best.keep_better(prefix_sweep(points, &xs, r, split, tol));
            return Ok(best);
        }
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut k = 1usize;
        loop {
            let lambda = xmin + k as f64 * step;
            k += 1;
            if lambda > xmax {
                break;
            }
            // a later plane with the same left set sees a superset of σ
            let next = lambda + step;
            if next <= xmax && !sorted.iter().any(|&x| x >= lambda && x < next) {
                continue;
            }
            stats.guesses += 1;
            if let Some(d) = improved_guess(
                points, &xs, r, vv, lambda, split, &is_plus, &is_minus, cfg, stats,
            )? {
                best.keep_better(d);
                if best.outcome == Outcome::StrictlyCoverable {
                    return Ok(best);
                }
            }
        }
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn improved_guess(
    points: &[Point3],
    xs: &[f64],
    r: f64,
    v: Vec3,
    lambda: f64,
    split: &Split,
    is_plus: &[bool],
    is_minus: &[bool],
    cfg: &SolverConfig,
    stats: &mut DecideStats,
) -> Result<Option<DecisionOutcome>> {
    let n = points.len();
    let tol = &cfg.tol;
    if split.plus.iter().any(|&i| xs[i] < lambda) {
        return Ok(None);
    }
    let left: Vec<usize> = (0..n).filter(|&i| !is_plus[i] && xs[i] < lambda).collect();
    if left.is_empty() {
        return Ok(None);
    }
    // cheap necessary conditions before building σ
    if !side_status(points, &left, r, tol).0.is_nonempty() {
        return Ok(None);
    }
    let far: Vec<usize> = (0..n)
        .filter(|&i| is_plus[i] || (xs[i] > lambda + r && !is_minus[i]))
        .collect();
    if !side_status(points, &far, r, tol).0.is_nonempty() {
        return Ok(None);
    }
    let left_pts: Vec<Point3> = left.iter().map(|&i| points[i]).collect();
    let extra: Vec<Ball> = (0..n)
        .filter(|&i| is_minus[i] && xs[i] >= lambda)
        .map(|i| Ball::new(points[i], r))
        .collect();
    let plane = Plane::new(v, lambda);
    let Some(sigma) = build_sigma(&left_pts, r, &plane, &extra, tol)? else {
        return Ok(None);
    };
    let curves: Vec<GammaCurve> = (0..n)
        .filter(|&i| !is_plus[i] && !is_minus[i] && xs[i] >= lambda)
        .map(|i| gamma_curve(i, points[i], &sigma))
        .collect();
    let map = build_map(&sigma, &curves)?;
    stats.map_vertices += map.vertex_count();
    stats.max_pair_hits = stats.max_pair_hits.max(map.max_pair_hits());
    stats.max_pair_arcs = stats.max_pair_arcs.max(map.max_pair_arcs());
    let tour = grand_tour(&map);
    let len = tour.len();
    if len == 0 {
        return Ok(None);
    }
    stats.leaves += len;
    let mut initial = vec![false; n];
    tour.initial.iter().for_each(|&i| initial[i] = true);
    split.plus.iter().for_each(|&i| initial[i] = true);
    let (inside, _) = spans_from_toggles(&initial, &tour.toggles());
    let tree = SpanTree::build(&inside, len)?;
    let mask: Vec<bool> = tour.moves.iter().map(|m| m.evaluate).collect();
    let statuses = match cfg.leaf_oracle {
        LeafOracle::Miniball => {
            evaluate_leaves_where(&tree, &mut MiniballPredicate::new(points, r, *tol), &mask)
        }
        LeafOracle::Polytope => {
            evaluate_leaves_where(&tree, &mut PolytopePredicate::new(points, r, *tol), &mask)
        }
    };
    let mut best = DecisionOutcome::not_coverable();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for (t, s) in statuses.iter().enumerate() {
        let Some(s) = s else { continue };
        if !s.is_nonempty() {
            continue;
        }
        let u = map.uncovered(tour.moves[t].node);
        if !seen.insert(u.to_vec()) {
            continue;
        }
        let mut part = vec![false; n];
        u.iter().for_each(|&i| part[i] = true);
        split.plus.iter().for_each(|&i| part[i] = true);
        best.keep_better(judge(points, &part, r, tol));
        if best.outcome == Outcome::StrictlyCoverable {
            break;
        }
    }
    Ok(Some(best))
}

/// Decision for instances promised to have `|c1 c2| >= βr` in every
/// covering at radius `r`, by searching surface maps over a finite set of
/// orientations and separating planes.
pub fn decide_improved(
    points: &[Point3],
    r: f64,
    beta: f64,
    cfg: &SolverConfig,
) -> Result<DecisionOutcome> {
    decide_improved_split(
        points,
        r,
        beta,
        &Split::free(points.len()),
        cfg,
        &mut DecideStats::default(),
    )
}

/// The map `M` of a single guess: `σ` for the points left of the plane
/// `v · x = lambda`, with one curve per point on its right.
pub fn map_for_guess(
    points: &[Point3],
    r: f64,
    v: Direction,
    lambda: f64,
    tol: &Tolerance,
) -> Result<Option<MapM>> {
    let vv = v.vec();
    let (left, right): (Vec<usize>, Vec<usize>) =
        (0..points.len()).partition(|&i| points[i].dot(vv) < lambda);
    let left_pts: Vec<Point3> = left.iter().map(|&i| points[i]).collect();
    let Some(sigma) = build_sigma(&left_pts, r, &Plane::new(vv, lambda), &[], tol)? else {
        return Ok(None);
    };
    let curves: Vec<GammaCurve> = right
        .iter()
        .map(|&i| gamma_curve(i, points[i], &sigma))
        .collect();
    build_map(&sigma, &curves).map(Some)
}

// ---------------------------------------------------------------------------
// Drivers

fn use_improved(cfg: &SolverConfig, beta: f64, n: usize) -> bool {
    match cfg.algorithm {
        Algorithm::Improved => beta >= IMPROVED_BETA_FLOOR,
        Algorithm::Cubic | Algorithm::Bruteforce => false,
        Algorithm::Auto => beta >= IMPROVED_BETA_FLOOR && estimated_guesses(beta) <= n,
    }
}

/// Upper estimate of the number of (orientation, plane) guesses.
pub fn estimated_guesses(beta: f64) -> usize {
    let dirs = canonical_directions(beta).map_or(usize::MAX / 64, |d| d.len());
    dirs.saturating_mul((20.0 / beta).ceil() as usize + 1)
}

/// Decision on a constrained subproblem with whichever procedure `cfg`
/// selects for the separation bound implied by `r0`.
pub fn decide_split(
    points: &[Point3],
    r: f64,
    r0: f64,
    split: &Split,
    cfg: &SolverConfig,
    stats: &mut DecideStats,
) -> Result<DecisionOutcome> {
    let beta = if r < r0 {
        beta_lower_bound(r, r0)?
    } else {
        0.0
    };
    if cfg.algorithm == Algorithm::Bruteforce {
        let bf = BruteForce::new(points, &cfg.tol);
        let mut best = DecisionOutcome::not_coverable();
        for (part, _, _) in &bf.parts {
            for flip in [false, true] {
                let p: Vec<bool> = part.iter().map(|&b| b ^ flip).collect();
                if split.plus.iter().any(|&i| !p[i]) || split.minus.iter().any(|&i| p[i]) {
                    continue;
                }
                best.keep_better(judge(points, &p, r, &cfg.tol));
            }
        }
        return Ok(best);
    }
    if use_improved(cfg, beta, points.len()) {
        decide_improved_split(points, r, beta, split, cfg, stats)
    } else {
        decide_cubic_split(points, r, split, cfg, stats)
    }
}

/// Coverability at radius `r` with the configured procedure.
pub fn decide(
    points: &[Point3],
    r: f64,
    cfg: &SolverConfig,
) -> Result<(DecisionOutcome, DecideStats)> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let r0 = smallest_enclosing_ball(points)?.radius;
    let mut stats = DecideStats::default();
    let r = if cfg.snap {
        snap_radius(points, r, &cfg.tol)
    } else {
        r
    };
    if r >= r0 {
        let part = vec![false; points.len()];
        return Ok((judge(points, &part, r, &cfg.tol), stats));
    }
    let d = decide_split(points, r, r0, &Split::free(points.len()), cfg, &mut stats)?;
    Ok((d, stats))
}

fn snap_radius(points: &[Point3], r: f64, tol: &Tolerance) -> f64 {
    let window = 1e3 * tol.slack(r);
    candidate_radii(points)
        .into_iter()
        .filter(|c| (c - r).abs() <= window)
        .min_by(|a, b| (a - r).abs().total_cmp(&(b - r).abs()))
        .unwrap_or(r)
}

/// Smallest `i >= 1` with `decide(r0 (1 - 2^-i)) != NotCoverable`, and that
/// radius. Stops early (returning `None`) once `1 - r/r0 <= epsilon`.
pub fn exponential_search<F>(r0: f64, epsilon: f64, mut decide: F) -> Result<Option<(f64, u32)>>
where
    F: FnMut(f64) -> Result<Outcome>,
{
    for i in 1..=MAX_SEARCH_STEPS {
        let r = r0 * (1.0 - 0.5f64.powi(i as i32));
        if decide(r)?.is_coverable() {
            return Ok(Some((r, i)));
        }
        if epsilon > 0.0 && 1.0 - r / r0 <= epsilon {
            return Ok(None);
        }
    }
    Ok(Some((r0, MAX_SEARCH_STEPS + 1)))
}

struct ChanState<'a> {
    points: &'a [Point3],
    r0: f64,
    cfg: &'a SolverConfig,
    rng: ChaCha8Rng,
    best_r: f64,
    best: Vec<bool>,
    meta: SolveMeta,
    memo: HashSet<Vec<usize>>,
}

impl ChanState<'_> {
    fn sides(&self, part: &[bool]) -> f64 {
        let (a, b): (Vec<usize>, Vec<usize>) = (0..self.points.len()).partition(|&i| !part[i]);
        let ra = seb_of_subset(self.points, &a).map_or(0.0, |e| e.radius);
        let rb = seb_of_subset(self.points, &b).map_or(0.0, |e| e.radius);
        ra.max(rb)
    }

    fn offer(&mut self, part: Vec<bool>) {
        let v = self.sides(&part);
        if v < self.best_r {
            self.best_r = v;
            self.best = part;
        }
    }

    fn solve(&mut self, split: Split) -> Result<()> {
        let n = self.points.len();
        let rho = self.cfg.rho.max(2).saturating_pow(self.cfg.levels.max(1));
        self.meta.subproblems += 1;
        if split.zero.len() < rho.max(2) {
            let m = split.zero.len();
            for mask in 0u64..(1u64 << m) {
                let mut part = vec![false; n];
                split.plus.iter().for_each(|&i| part[i] = true);
                for (k, &i) in split.zero.iter().enumerate() {
                    part[i] = mask >> k & 1 == 1;
                }
                self.offer(part);
            }
            return Ok(());
        }
        let planes: Vec<Plane> = dual_planes(self.points, &split.zero);
        let cutting = match build_cutting(&planes, rho, self.rng.gen(), &self.cfg.tol) {
            Ok(c) => c,
            // degenerate duals (e.g. collinear points): enumerate directly
            Err(Error::CuttingFailure(_) | Error::DegenerateArrangement) => {
                self.meta.exhaustive_fallbacks += 1;
                let zpts: Vec<Point3> = split.zero.iter().map(|&i| self.points[i]).collect();
                for sub in separable_bipartitions(&zpts, &self.cfg.tol) {
                    for flip in [false, true] {
                        let mut part = vec![false; n];
                        split.plus.iter().for_each(|&i| part[i] = true);
                        for (k, &i) in split.zero.iter().enumerate() {
                            part[i] = sub[k] ^ flip;
                        }
                        self.offer(part);
                    }
                }
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let mut subs: Vec<Split> = cutting
            .simplices
            .iter()
            .map(|sx| {
                let (above, below, crossing) = classify_planes(sx, &planes, &self.cfg.tol);
                let mut minus = split.minus.clone();
                minus.extend(above.iter().map(|&k| split.zero[k]));
                let mut plus = split.plus.clone();
                plus.extend(below.iter().map(|&k| split.zero[k]));
                let zero: Vec<usize> = crossing.iter().map(|&k| split.zero[k]).collect();
                Split { minus, plus, zero }
            })
            .collect();
        subs.shuffle(&mut self.rng);
        for sub in subs {
            let mut key: Vec<usize> = sub.minus.clone();
            key.sort_unstable();
            key.push(usize::MAX);
            let mut p = sub.plus.clone();
            p.sort_unstable();
            key.extend(p);
            if !self.memo.insert(key) {
                continue;
            }
            // forced sides alone already reach the current best
            let lb = [&sub.minus, &sub.plus]
                .iter()
                .map(|s| seb_of_subset(self.points, s).map_or(0.0, |e| e.radius))
                .fold(0.0, f64::max);
            if self.cfg.tol.cmp(lb, self.best_r) >= 0 {
                continue;
            }
            self.meta.decisions += 1;
            let mut stats = DecideStats::default();
            let d = decide_split(
                self.points,
                self.best_r,
                self.r0,
                &sub,
                self.cfg,
                &mut stats,
            )?;
            self.meta.stats.absorb(&stats);
            if d.outcome == Outcome::StrictlyCoverable {
                if let Some(p) = d.partition {
                    self.offer(p);
                }
                self.solve(sub)?;
            }
        }
        Ok(())
    }
}

fn dual_planes(points: &[Point3], idx: &[usize]) -> Vec<Plane> {
    let pts: Vec<Point3> = idx.iter().map(|&i| points[i]).collect();
    let scale = diameter_scale(&pts);
    let c = pts.iter().fold(Point3::ORIGIN, |a, &p| a + p) * (1.0 / pts.len().max(1) as f64);
    pts.iter()
        .map(|&p| dualize_point((p - c) * (1.0 / scale)))
        .collect()
}

/// Exact optimum given an upper bound `r_prime >= r*` whose decision
/// succeeded, by recursing over cuttings of the dual arrangement and
/// re-deciding subproblems at the incumbent radius.
pub fn optimize_chan(
    points: &[Point3],
    r_prime: f64,
    witness: &[bool],
    cfg: &SolverConfig,
) -> Result<TwoCenterSolution> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let r0 = smallest_enclosing_ball(points)?.radius;
    let mut st = ChanState {
        points,
        r0,
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        best_r: f64::INFINITY,
        best: vec![false; points.len()],
        meta: SolveMeta {
            seed: cfg.seed,
            r0,
            ..Default::default()
        },
        memo: HashSet::new(),
    };
    st.offer(vec![false; points.len()]);
    st.offer(witness.to_vec());
    debug_assert!(st.best_r <= r_prime * (1.0 + 1e-6) + 1e-12);
    st.solve(Split::free(points.len()))?;
    let part = st.best.clone();
    let (a, b): (Vec<usize>, Vec<usize>) = (0..points.len()).partition(|&i| !part[i]);
    let c1 = seb_of_subset(points, &a).map(|e| e.center);
    let c2 = seb_of_subset(points, &b).map(|e| e.center);
    let c1v = c1.or(c2).unwrap_or(points[0]);
    Ok(TwoCenterSolution {
        c1: c1v,
        c2: c2.unwrap_or(c1v),
        radius: st.best_r,
        partition: part,
        meta: st.meta,
    })
}

fn algorithm_name(cfg: &SolverConfig) -> &'static str {
    match cfg.algorithm {
        Algorithm::Cubic => "cubic",
        Algorithm::Improved => "improved",
        Algorithm::Bruteforce => "bruteforce",
        Algorithm::Auto => "auto",
    }
}

/// Solves the 2-center problem: exponential search for an upper bound,
/// then the exact optimisation. With `epsilon > 0` the enclosing ball may
/// be returned when it is already within a factor `1/(1-ε)`.
pub fn solve(points: &[Point3], cfg: &SolverConfig) -> Result<SolveResult> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if cfg.algorithm == Algorithm::Bruteforce {
        let mut s = optimize_reference(points, &cfg.tol)?;
        s.meta.seed = cfg.seed;
        return Ok(SolveResult::Exact(s));
    }
    let seb = smallest_enclosing_ball(points)?;
    let r0 = seb.radius;
    let mut meta = SolveMeta {
        algorithm: algorithm_name(cfg).into(),
        seed: cfg.seed,
        r0,
        ..Default::default()
    };
    if r0 <= cfg.tol.slack(0.0) {
        let c = seb.center;
        return Ok(SolveResult::Exact(TwoCenterSolution {
            c1: c,
            c2: c,
            radius: r0,
            partition: vec![false; points.len()],
            meta,
        }));
    }
    let mut witness: Option<Vec<bool>> = None;
    let mut stats = DecideStats::default();
    let found = exponential_search(r0, cfg.epsilon, |r| {
        meta.decisions += 1;
        let d = decide_split(points, r, r0, &Split::free(points.len()), cfg, &mut stats)?;
        if d.outcome.is_coverable() {
            witness = d.partition.clone();
        }
        Ok(d.outcome)
    })?;
    meta.stats = stats;
    let Some((r_prime, steps)) = found else {
        return Ok(SolveResult::ApproximateBySeb { ball: seb, meta });
    };
    meta.search_radius = r_prime;
    meta.search_steps = steps;
    meta.beta = if r_prime < r0 {
        beta_lower_bound(r_prime, r0)?
    } else {
        0.0
    };
    let witness = witness.unwrap_or_else(|| vec![false; points.len()]);
    let mut sol = optimize_chan(points, r_prime, &witness, cfg)?;
    sol.meta.algorithm = meta.algorithm.clone();
    sol.meta.search_radius = r_prime;
    sol.meta.search_steps = steps;
    sol.meta.beta = meta.beta;
    sol.meta.decisions += meta.decisions;
    sol.meta.stats.absorb(&meta.stats);
    Ok(SolveResult::Exact(sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_points(seed: u64, n: usize) -> Vec<Point3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
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

    // every bipartition, no geometry
    fn exhaustive_optimum(points: &[Point3]) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        for mask in 0u64..(1u64 << (n - 1)) {
            let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| mask >> i & 1 == 0);
            let ra = seb_of_subset(points, &a).map_or(0.0, |e| e.radius);
            let rb = seb_of_subset(points, &b).map_or(0.0, |e| e.radius);
            best = best.min(ra.max(rb));
        }
        best
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-7 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn beta_bound_examples() {
        assert_eq!(beta_lower_bound(0.5, 1.0).unwrap(), 2.0);
        assert!((beta_lower_bound(0.8, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(beta_lower_bound(1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            beta_lower_bound(1.2, 1.0),
            Err(Error::InvalidRadius { .. })
        ));
        assert!(matches!(
            beta_lower_bound(0.0, 1.0),
            Err(Error::InvalidRadius { .. })
        ));
    }

    #[test]
    fn separable_enumeration_finds_the_optimum() {
        for seed in 0..40 {
            let n = 3 + (seed as usize % 10);
            let pts = random_points(seed, n);
            let bf = BruteForce::new(&pts, &Tolerance::default());
            assert!(
                close(bf.optimum().0, exhaustive_optimum(&pts)),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn separable_enumeration_on_degenerate_sets() {
        let grid: Vec<Point3> = (0..3)
            .flat_map(|i| (0..3).map(move |j| Point3::new(i as f64, j as f64, 0.0)))
            .collect();
        let line: Vec<Point3> = (0..7).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let mut cube: Vec<Point3> = Vec::new();
        for i in 0..8 {
            cube.push(Point3::new(
                (i & 1) as f64,
                (i >> 1 & 1) as f64,
                (i >> 2 & 1) as f64,
            ));
        }
        cube.push(Point3::new(0.5, 0.5, 0.5));
        let mut dup = random_points(3, 6);
        dup.push(dup[0]);
        dup.push(dup[2]);
        for pts in [grid, line, cube, dup] {
            let bf = BruteForce::new(&pts, &Tolerance::default());
            assert!(close(bf.optimum().0, exhaustive_optimum(&pts)));
        }
        // a line splits only into prefixes: 7 of them up to orientation
        let line: Vec<Point3> = (0..7).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        assert_eq!(
            separable_bipartitions(&line, &Tolerance::default()).len(),
            7
        );
    }

    #[test]
    fn four_collinear_points() {
        let pts: Vec<Point3> = [0.0, 1.0, 10.0, 11.0]
            .iter()
            .map(|&x| Point3::new(x, 0.0, 0.0))
            .collect();
        let tol = Tolerance::default();
        assert_eq!(
            brute_force_decide(&pts, 0.6, &tol).outcome,
            Outcome::StrictlyCoverable
        );
        assert_eq!(
            brute_force_decide(&pts, 0.5, &tol).outcome,
            Outcome::ExactlyCritical
        );
        assert_eq!(
            brute_force_decide(&pts, 0.4, &tol).outcome,
            Outcome::NotCoverable
        );
        let s = optimize_reference(&pts, &tol).unwrap();
        assert!(close(s.radius, 0.5));
        let cfg = SolverConfig::default();
        for r in [0.4, 0.5, 0.6] {
            let want = brute_force_decide(&pts, r, &tol).outcome;
            assert_eq!(
                decide_cubic(&pts, r, &cfg).unwrap().outcome,
                want,
                "cubic r={r}"
            );
            let beta = beta_lower_bound(r, 5.5).unwrap();
            assert_eq!(
                decide_improved(&pts, r, beta, &cfg).unwrap().outcome,
                want,
                "improved r={r}"
            );
        }
    }

    #[test]
    fn cubic_matches_brute_force() {
        let cfg = SolverConfig::default();
        let tol = cfg.tol;
        for seed in 0..30 {
            let n = 2 + (seed as usize % 9);
            let pts = random_points(100 + seed, n);
            let bf = BruteForce::new(&pts, &tol);
            let (opt, _) = bf.optimum();
            for f in [0.9, 0.999, 1.0, 1.001, 1.1] {
                let r = opt * f;
                let want = bf.decide(r).outcome;
                let got = decide_cubic(&pts, r, &cfg).unwrap();
                assert_eq!(got.outcome, want, "seed {seed} f {f}");
                if let Some(part) = got.partition {
                    assert!(judge(&pts, &part, r, &tol).outcome.is_coverable());
                }
            }
        }
    }

    #[test]
    fn cubic_polytope_oracle_agrees() {
        let mut cfg = SolverConfig {
            leaf_oracle: LeafOracle::Polytope,
            ..Default::default()
        };
        cfg.seed = 5;
        for seed in 0..6 {
            let pts = random_points(200 + seed, 6);
            let bf = BruteForce::new(&pts, &cfg.tol);
            let opt = bf.optimum().0;
            for f in [0.95, 1.05] {
                assert_eq!(
                    decide_cubic(&pts, opt * f, &cfg).unwrap().outcome,
                    bf.decide(opt * f).outcome
                );
            }
        }
    }

    #[test]
    fn cubic_survives_degenerate_input() {
        let grid: Vec<Point3> = (0..3)
            .flat_map(|i| (0..3).map(move |j| Point3::new(i as f64, j as f64, 0.0)))
            .collect();
        let cfg = SolverConfig::default();
        let bf = BruteForce::new(&grid, &cfg.tol);
        let opt = bf.optimum().0;
        let mut stats = DecideStats::default();
        for f in [0.97, 1.03] {
            let d = decide_cubic_split(&grid, opt * f, &Split::free(grid.len()), &cfg, &mut stats)
                .unwrap();
            assert_eq!(d.outcome, bf.decide(opt * f).outcome);
        }
        assert!(stats.perturbed);
    }

    #[test]
    fn improved_matches_brute_force() {
        let cfg = SolverConfig::default();
        let tol = cfg.tol;
        for seed in 0..12 {
            let n = 3 + (seed as usize % 6);
            let pts = random_points(300 + seed, n);
            let r0 = smallest_enclosing_ball(&pts).unwrap().radius;
            let bf = BruteForce::new(&pts, &tol);
            let opt = bf.optimum().0;
            for f in [0.9, 1.0, 1.1] {
                let r = opt * f;
                if r >= r0 {
                    continue;
                }
                let beta = beta_lower_bound(r, r0).unwrap();
                if beta < 0.3 {
                    continue;
                }
                let got = decide_improved(&pts, r, beta, &cfg).unwrap();
                assert_eq!(got.outcome, bf.decide(r).outcome, "seed {seed} f {f}");
            }
        }
    }

    #[test]
    fn split_decisions_respect_forced_sides() {
        let pts: Vec<Point3> = [0.0, 1.0, 10.0, 11.0]
            .iter()
            .map(|&x| Point3::new(x, 0.0, 0.0))
            .collect();
        let cfg = SolverConfig::default();
        let mut st = DecideStats::default();
        // forcing 0 and 3 together makes radius 0.6 impossible
        let split = Split {
            minus: vec![0, 3],
            plus: vec![],
            zero: vec![1, 2],
        };
        let d = decide_split(&pts, 0.6, 5.5, &split, &cfg, &mut st).unwrap();
        assert_eq!(d.outcome, Outcome::NotCoverable);
        let split = Split {
            minus: vec![0],
            plus: vec![3],
            zero: vec![1, 2],
        };
        for algo in [Algorithm::Cubic, Algorithm::Improved, Algorithm::Bruteforce] {
            let cfg = SolverConfig {
                algorithm: algo,
                ..Default::default()
            };
            let d = decide_split(&pts, 0.6, 5.5, &split, &cfg, &mut st).unwrap();
            assert_eq!(d.outcome, Outcome::StrictlyCoverable);
            let part = d.partition.unwrap();
            assert_eq!(part, vec![false, false, true, true]);
        }
    }

    #[test]
    fn exponential_search_trace() {
        let trace = |rstar: f64, eps: f64| {
            exponential_search(1.0, eps, |r| {
                Ok(if r > rstar {
                    Outcome::StrictlyCoverable
                } else {
                    Outcome::NotCoverable
                })
            })
            .unwrap()
        };
        assert_eq!(trace(0.7, 0.1).map(|x| x.1), Some(2));
        assert_eq!(trace(0.95, 0.3), None);
        assert_eq!(trace(0.95, 0.0).map(|x| x.1), Some(5));
    }

    #[test]
    fn solve_matches_reference() {
        for (k, algo) in [Algorithm::Cubic, Algorithm::Improved, Algorithm::Auto]
            .into_iter()
            .enumerate()
        {
            for seed in 0..6 {
                let n = 4 + (seed as usize % 7);
                let pts = random_points(400 + seed + 10 * k as u64, n);
                let want = exhaustive_optimum(&pts);
                let cfg = SolverConfig {
                    algorithm: algo,
                    seed,
                    rho: 2,
                    ..Default::default()
                };
                let SolveResult::Exact(s) = solve(&pts, &cfg).unwrap() else {
                    panic!("approximate")
                };
                assert!(
                    close(s.radius, want),
                    "{algo:?} seed {seed}: {} vs {want}",
                    s.radius
                );
                let covered = (0..n).all(|i| {
                    let c = if s.partition[i] { s.c2 } else { s.c1 };
                    c.dist(pts[i]) <= s.radius * (1.0 + 1e-9) + 1e-9
                });
                assert!(covered);
            }
        }
    }

    #[test]
    fn solve_handles_collinear_and_coplanar_input() {
        let line: Vec<Point3> = [0.0, 2.0, 10.0, 12.0, 5.0, 7.5]
            .iter()
            .map(|&x| Point3::new(x, 0.0, 0.0))
            .collect();
        let grid: Vec<Point3> = (0..4)
            .flat_map(|i| (0..3).map(move |j| Point3::new(i as f64, j as f64 * 1.5, 0.0)))
            .collect();
        for pts in [line, grid] {
            let want = exhaustive_optimum(&pts);
            for algo in [Algorithm::Cubic, Algorithm::Improved] {
                let cfg = SolverConfig {
                    algorithm: algo,
                    rho: 2,
                    ..Default::default()
                };
                let got = solve(&pts, &cfg).unwrap().radius();
                assert!(close(got, want), "{algo:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn solve_trivial_inputs() {
        let cfg = SolverConfig::default();
        assert!(matches!(solve(&[], &cfg), Err(Error::EmptyInput)));
        let p = Point3::new(1.0, 2.0, 3.0);
        assert_eq!(solve(&[p], &cfg).unwrap().radius(), 0.0);
        assert_eq!(solve(&[p, p, p], &cfg).unwrap().radius(), 0.0);
        let two = [p, Point3::new(3.0, 2.0, 3.0)];
        assert!(solve(&two, &cfg).unwrap().radius() < 1e-9);
    }

    #[test]
    fn decisions_are_monotone_along_radius_ladders() {
        let cfg = SolverConfig::default();
        for seed in 0..8 {
            let pts = random_points(500 + seed, 7);
            let opt = BruteForce::new(&pts, &cfg.tol).optimum().0;
            let mut seen = false;
            let mut critical = 0;
            for k in 0..=40 {
                let r = opt * (0.8 + 0.01 * k as f64);
                let (d, _) = decide(&pts, r, &cfg).unwrap();
                assert!(!seen || d.outcome.is_coverable(), "seed {seed} k {k}");
                seen |= d.outcome.is_coverable();
                critical += (d.outcome == Outcome::ExactlyCritical) as usize;
            }
            assert_eq!(critical, 1, "seed {seed}");
        }
    }

    #[test]
    fn tour_seed_does_not_change_the_verdict() {
        let grid: Vec<Point3> = (0..3)
            .flat_map(|i| (0..3).map(move |j| Point3::new(i as f64, j as f64, 0.0)))
            .collect();
        let opt = BruteForce::new(&grid, &Tolerance::default()).optimum().0;
        for r in [opt * 0.99, opt, opt * 1.01] {
            let a = decide_cubic(
                &grid,
                r,
                &SolverConfig {
                    seed: 1,
                    ..Default::default()
                },
            )
            .unwrap();
            let b = decide_cubic(
                &grid,
                r,
                &SolverConfig {
                    seed: 99,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(a.outcome, b.outcome);
        }
    }

    #[test]
    fn snapping_lands_on_the_critical_radius() {
        let pts: Vec<Point3> = [0.0, 2.0, 10.0, 12.0]
            .iter()
            .map(|&x| Point3::new(x, 0.0, 0.0))
            .collect();
        let cfg = SolverConfig {
            snap: true,
            ..Default::default()
        };
        let (d, _) = decide(&pts, 1.0 + 1e-7, &cfg).unwrap();
        assert_eq!(d.outcome, Outcome::ExactlyCritical);
        let (d, _) = decide(&pts, 1.0 + 1e-7, &SolverConfig::default()).unwrap();
        assert_eq!(d.outcome, Outcome::StrictlyCoverable);
    }

    #[test]
    fn epsilon_allows_enclosing_ball() {
        // near-regular polygon: the optimum is close to the enclosing radius
        let pts: Vec<Point3> = (0..7)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 7.0;
                Point3::new(t.cos(), t.sin(), 0.0)
            })
            .collect();
        let cfg = SolverConfig {
            epsilon: 0.3,
            ..Default::default()
        };
        assert!(matches!(
            solve(&pts, &cfg).unwrap(),
            SolveResult::ApproximateBySeb { .. }
        ));
    }
}
