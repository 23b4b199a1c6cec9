//! Offline membership intervals ("life-spans") over a tour, stored in a
//! segment tree and evaluated leaf by leaf with a depth-first insertion stack.

use std::borrow::Borrow;

use serde::{Deserialize, Serialize};

use crate::arrangement::CellTour;
use crate::ball_intersection::{build_polytope, pi2_emptiness, PlaneQuery, SphericalPolytope};
use crate::error::{Error, Result};
use crate::geom::{Ball, Point3, Tolerance};
use crate::miniball::{seb_of_subset, status_from_radius, IntersectionStatus};

/// Item `item` is a member over tour positions `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifeSpan {
    pub item: usize,
    pub start: usize,
    pub end: usize,
}

/// Spans of a membership set that starts as `initial` and flips one item per
/// step. `toggles[t]` is the item flipped on entering position `t`.
pub fn spans_from_toggles(
    initial: &[bool],
    toggles: &[Option<usize>],
) -> (Vec<LifeSpan>, Vec<LifeSpan>) {
    let len = toggles.len();
    let mut member = initial.to_vec();
    let mut since = vec![0usize; initial.len()];
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    for (t, tg) in toggles.iter().enumerate() {
        let Some(k) = *tg else { continue };
        if t == 0 {
            member[k] = !member[k];
            continue;
        }
        let span = LifeSpan {
            item: k,
            start: since[k],
            end: t,
        };
        if member[k] {
            inside.push(span);
        } else {
            outside.push(span);
        }
        member[k] = !member[k];
        since[k] = t;
    }
    for k in 0..initial.len() {
        if len == 0 {
            break;
        }
        let span = LifeSpan {
            item: k,
            start: since[k],
            end: len,
        };
        if member[k] {
            inside.push(span);
        } else {
            outside.push(span);
        }
    }
    (inside, outside)
}

/// Life-spans of `P⁺` and `P⁻` along a cell tour, given membership in `P⁺`
/// at the first cell.
pub fn compute_spans(tour: &CellTour, initial: &[bool]) -> (Vec<LifeSpan>, Vec<LifeSpan>) {
    let toggles: Vec<Option<usize>> = tour.steps.iter().map(|s| s.toggled).collect();
    spans_from_toggles(initial, &toggles)
}

/// Segment tree over `[0, leaves)` with item lists at canonical nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanTree {
    pub leaves: usize,
    /// Heap-ordered nodes; node 1 is the root.
    pub nodes: Vec<Vec<usize>>,
}

impl SpanTree {
    pub fn build(spans: &[LifeSpan], leaves: usize) -> Result<Self> {
        let mut tree = SpanTree {
            leaves,
            nodes: vec![Vec::new(); 4 * leaves.max(1)],
        };
        for s in spans {
            if s.start >= s.end || s.end > leaves {
                return Err(Error::SpanOutOfRange {
                    start: s.start,
                    end: s.end,
                    len: leaves,
                });
            }
            tree.insert(1, 0, leaves, s);
        }
        Ok(tree)
    }

    fn insert(&mut self, node: usize, lo: usize, hi: usize, s: &LifeSpan) {
        if s.start <= lo && hi <= s.end {
            self.nodes[node].push(s.item);
            return;
        }
        let mid = (lo + hi) / 2;
        if s.start < mid {
            self.insert(2 * node, lo, mid, s);
        }
        if s.end > mid {
            self.insert(2 * node + 1, mid, hi, s);
        }
    }

    /// Total number of stored item references.
    pub fn storage(&self) -> usize {
        self.nodes.iter().map(Vec::len).sum()
    }

    /// Items stored on the root-to-leaf path of `leaf`.
    pub fn path_items(&self, leaf: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let (mut node, mut lo, mut hi) = (1, 0, self.leaves);
        loop {
            out.extend_from_slice(&self.nodes[node]);
            if hi - lo <= 1 {
                return out;
            }
            let mid = (lo + hi) / 2;
            if leaf < mid {
                node *= 2;
                hi = mid;
            } else {
                node = 2 * node + 1;
                lo = mid;
            }
        }
    }
}

/// Emptiness class of an intersection family at one leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LeafStatus {
    Empty,
    Degenerate(Point3),
    FullDim(Point3),
    /// No constraint at all: the intersection is the whole space.
    Unconstrained,
}

impl LeafStatus {
    pub fn is_nonempty(&self) -> bool {
        !matches!(self, LeafStatus::Empty)
    }

    /// Nonempty interior (the unconstrained case counts).
    pub fn is_full(&self) -> bool {
        matches!(self, LeafStatus::FullDim(_) | LeafStatus::Unconstrained)
    }

    pub fn point(&self) -> Option<Point3> {
        match *self {
            LeafStatus::Degenerate(p) | LeafStatus::FullDim(p) => Some(p),
            _ => None,
        }
    }
}

impl From<IntersectionStatus> for LeafStatus {
    fn from(s: IntersectionStatus) -> Self {
        match s {
            IntersectionStatus::Empty => LeafStatus::Empty,
            IntersectionStatus::Degenerate(p) => LeafStatus::Degenerate(p),
            IntersectionStatus::FullDim(p) => LeafStatus::FullDim(p),
        }
    }
}

/// Emptiness predicate driven by a depth-first walk of a [`SpanTree`].
pub trait LeafPredicate {
    /// Entering a node that adds `items`. Returning `false` declares every
    /// leaf below empty (the family only grows along a path).
    fn enter(&mut self, items: &[usize], stack: &[usize]) -> bool;
    fn exit(&mut self, items: &[usize]);
    /// Classifies the full membership set at a leaf (never empty).
    fn leaf(&mut self, stack: &[usize]) -> LeafStatus;
}

/// Evaluates `pred` on the membership set of every leaf.
pub fn evaluate_leaves<P: LeafPredicate + ?Sized>(
    tree: &SpanTree,
    pred: &mut P,
) -> Vec<LeafStatus> {
    let mask = vec![true; tree.leaves];
    evaluate_leaves_where(tree, pred, &mask)
        .into_iter()
        .map(|s| s.unwrap_or(LeafStatus::Empty))
        .collect()
}

/// Like [`evaluate_leaves`] but only at leaves with `mask[leaf]`; the rest
/// come back as `None`.
pub fn evaluate_leaves_where<P: LeafPredicate + ?Sized>(
    tree: &SpanTree,
    pred: &mut P,
    mask: &[bool],
) -> Vec<Option<LeafStatus>> {
    let mut out: Vec<Option<LeafStatus>> = (0..tree.leaves)
        .map(|i| {
            mask.get(i)
                .copied()
                .unwrap_or(false)
                .then_some(LeafStatus::Empty)
        })
        .collect();
    if tree.leaves == 0 {
        return out;
    }
    let mut stack = Vec::new();
    walk(tree, pred, 1, 0, tree.leaves, &mut stack, &mut out, mask);
    out
}

#[allow(clippy::too_many_arguments)]
fn walk<P: LeafPredicate + ?Sized>(
    tree: &SpanTree,
    pred: &mut P,
    node: usize,
    lo: usize,
    hi: usize,
    stack: &mut Vec<usize>,
    out: &mut [Option<LeafStatus>],
    mask: &[bool],
) {
    if !mask[lo..hi].iter().any(|&m| m) {
        return;
    }
    let items = &tree.nodes[node];
    let mark = stack.len();
    stack.extend_from_slice(items);
    let alive = items.is_empty() || pred.enter(items, stack);
    if alive {
        if hi - lo == 1 {
            out[lo] = Some(if stack.is_empty() {
                LeafStatus::Unconstrained
            } else {
                pred.leaf(stack)
            });
        } else {
            let mid = (lo + hi) / 2;
            walk(tree, pred, 2 * node, lo, mid, stack, out, mask);
            walk(tree, pred, 2 * node + 1, mid, hi, stack, out, mask);
        }
        if !items.is_empty() {
            pred.exit(items);
        }
    }
    // pruned subtrees keep their default Empty
    stack.truncate(mark);
}

/// Leaf predicate on `∩ B_r(p)` via the smallest enclosing ball of the
/// member points, recomputed at each leaf.
pub struct MiniballPredicate<'a> {
    pub points: &'a [Point3],
    pub r: f64,
    pub tol: Tolerance,
    /// Prune subtrees whose accumulated set is already infeasible.
    pub prune: bool,
}

impl<'a> MiniballPredicate<'a> {
    pub fn new(points: &'a [Point3], r: f64, tol: Tolerance) -> Self {
        MiniballPredicate {
            points,
            r,
            tol,
            prune: true,
        }
    }

    pub fn status(&self, items: &[usize]) -> LeafStatus {
        match seb_of_subset(self.points, items) {
            None => LeafStatus::Unconstrained,
            Some(b) => status_from_radius(b.radius, b.center, self.r, &self.tol).into(),
        }
    }
}

impl LeafPredicate for MiniballPredicate<'_> {
    fn enter(&mut self, _items: &[usize], stack: &[usize]) -> bool {
        !self.prune || self.status(stack).is_nonempty()
    }

    fn exit(&mut self, _items: &[usize]) {}

    fn leaf(&mut self, stack: &[usize]) -> LeafStatus {
        self.status(stack)
    }
}

/// Leaf predicate that builds one spherical polytope per tree node and
/// decides each root-to-leaf family with the plane-level query.
pub struct PolytopePredicate<'a> {
    pub points: &'a [Point3],
    pub r: f64,
    pub tol: Tolerance,
    family: Vec<SphericalPolytope>,
}

impl<'a> PolytopePredicate<'a> {
    pub fn new(points: &'a [Point3], r: f64, tol: Tolerance) -> Self {
        PolytopePredicate {
            points,
            r,
            tol,
            family: Vec::new(),
        }
    }
}

/// Classifies a family of polytopes with the plane-level query.
pub fn family_status<P: Borrow<SphericalPolytope>>(family: &[P], tol: &Tolerance) -> LeafStatus {
    if family.is_empty() {
        return LeafStatus::Unconstrained;
    }
    match pi2_emptiness(family, tol) {
        PlaneQuery::Empty(_) => LeafStatus::Empty,
        PlaneQuery::Witness {
            point,
            degenerate: true,
        } => LeafStatus::Degenerate(point),
        PlaneQuery::Witness {
            point,
            degenerate: false,
        } => LeafStatus::FullDim(point),
    }
}

impl LeafPredicate for PolytopePredicate<'_> {
    fn enter(&mut self, items: &[usize], _stack: &[usize]) -> bool {
        let balls: Vec<Ball> = items
            .iter()
            .map(|&i| Ball::new(self.points[i], self.r))
            .collect();
        match build_polytope(&balls, &self.tol) {
            Ok(Some(p)) => {
                self.family.push(p);
                true
            }
            _ => false,
        }
    }

    fn exit(&mut self, _items: &[usize]) {
        self.family.pop();
    }

    fn leaf(&mut self, _stack: &[usize]) -> LeafStatus {
        family_status(&self.family, &self.tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::TourStep;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_toggles(
        rng: &mut ChaCha8Rng,
        items: usize,
        len: usize,
    ) -> (Vec<bool>, Vec<Option<usize>>) {
        let initial = (0..items).map(|_| rng.gen_bool(0.5)).collect();
        let mut t = vec![None];
        for _ in 1..len {
            t.push(Some(rng.gen_range(0..items)));
        }
        (initial, t)
    }

    fn simulate(initial: &[bool], toggles: &[Option<usize>]) -> Vec<Vec<bool>> {
        let mut cur = initial.to_vec();
        let mut out = Vec::new();
        for t in toggles
            .iter()
            .skip(1)
            .map(|t| t.unwrap())
            .map(Some)
            .chain(std::iter::once(None))
        {
            out.push(cur.clone());
            if let Some(k) = t {
                cur[k] = !cur[k];
            }
        }
        out
    }

    fn tour_from(toggles: &[Option<usize>]) -> CellTour {
        CellTour {
            steps: toggles
                .iter()
                .enumerate()
                .map(|(i, &t)| TourStep {
                    cell: i,
                    toggled: t,
                })
                .collect(),
        }
    }

    #[test]
    fn span_examples() {
        let mut t = vec![None; 10];
        t[3] = Some(0);
        t[7] = Some(0);
        let (inside, _) = compute_spans(&tour_from(&t), &[false, true]);
        assert!(inside.contains(&LifeSpan {
            item: 0,
            start: 3,
            end: 7
        }));
        assert!(inside.contains(&LifeSpan {
            item: 1,
            start: 0,
            end: 10
        }));
        assert_eq!(inside.len(), 2);
    }

    #[test]
    fn spans_reconstruct_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..100 {
            let items = rng.gen_range(1..12);
            let len = rng.gen_range(1..200);
            let (init, tg) = random_toggles(&mut rng, items, len);
            let (inside, outside) = spans_from_toggles(&init, &tg);
            let toggles = tg.iter().skip(1).count();
            assert_eq!(inside.len() + outside.len(), items + toggles);
            let truth = simulate(&init, &tg);
            for (t, row) in truth.iter().enumerate() {
                for k in 0..items {
                    let a = inside
                        .iter()
                        .any(|s| s.item == k && s.start <= t && t < s.end);
                    let b = outside
                        .iter()
                        .any(|s| s.item == k && s.start <= t && t < s.end);
                    assert_eq!(a, row[k]);
                    assert_eq!(b, !row[k]);
                }
            }
        }
    }

    #[test]
    fn tree_examples() {
        let t = SpanTree::build(
            &[LifeSpan {
                item: 4,
                start: 0,
                end: 8,
            }],
            8,
        )
        .unwrap();
        assert_eq!(t.nodes[1], vec![4]);
        assert_eq!(t.storage(), 1);
        let t = SpanTree::build(
            &[LifeSpan {
                item: 2,
                start: 1,
                end: 2,
            }],
            8,
        )
        .unwrap();
        assert_eq!(t.storage(), 1);
        assert_eq!(t.nodes[9], vec![2]);
        assert_eq!(
            SpanTree::build(
                &[LifeSpan {
                    item: 0,
                    start: 3,
                    end: 9
                }],
                8
            ),
            Err(Error::SpanOutOfRange {
                start: 3,
                end: 9,
                len: 8
            })
        );
    }

    #[test]
    fn path_union_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..40 {
            let items = rng.gen_range(1..20);
            let len = rng.gen_range(1..=512);
            let (init, tg) = random_toggles(&mut rng, items, len);
            let (inside, outside) = spans_from_toggles(&init, &tg);
            let tree = SpanTree::build(&inside, len).unwrap();
            let comp = SpanTree::build(&outside, len).unwrap();
            let depth = (len as f64).log2().ceil().max(1.0) as usize;
            assert!(tree.storage() <= inside.len() * 2 * depth);
            let truth = simulate(&init, &tg);
            for leaf in 0..len {
                let mut got = tree.path_items(leaf);
                got.sort_unstable();
                let want: Vec<usize> = (0..items).filter(|&k| truth[leaf][k]).collect();
                assert_eq!(got, want);
                let mut other = comp.path_items(leaf);
                other.sort_unstable();
                let rest: Vec<usize> = (0..items).filter(|&k| !truth[leaf][k]).collect();
                assert_eq!(other, rest);
            }
        }
    }

    #[test]
    fn per_span_storage_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..2000 {
            let len = rng.gen_range(1..3000);
            let a = rng.gen_range(0..len);
            let b = rng.gen_range(a + 1..=len);
            let t = SpanTree::build(
                &[LifeSpan {
                    item: 0,
                    start: a,
                    end: b,
                }],
                len,
            )
            .unwrap();
            let depth = (len as f64).log2().ceil().max(1.0) as usize;
            assert!(t.storage() <= 2 * depth);
        }
    }

    #[test]
    fn empty_tree_is_unconstrained() {
        let t = SpanTree::build(&[], 5).unwrap();
        let pts = [Point3::ORIGIN];
        let out = evaluate_leaves(
            &t,
            &mut MiniballPredicate::new(&pts, 1.0, Tolerance::default()),
        );
        assert!(out.iter().all(|s| *s == LeafStatus::Unconstrained));
    }

    #[test]
    fn single_item_everywhere() {
        let t = SpanTree::build(
            &[LifeSpan {
                item: 0,
                start: 0,
                end: 6,
            }],
            6,
        )
        .unwrap();
        struct Seen(Vec<Vec<usize>>);
        impl LeafPredicate for Seen {
            fn enter(&mut self, _: &[usize], _: &[usize]) -> bool {
                true
            }
            fn exit(&mut self, _: &[usize]) {}
            fn leaf(&mut self, stack: &[usize]) -> LeafStatus {
                self.0.push(stack.to_vec());
                LeafStatus::FullDim(Point3::ORIGIN)
            }
        }
        let mut seen = Seen(Vec::new());
        evaluate_leaves(&t, &mut seen);
        assert_eq!(seen.0, vec![vec![0]; 6]);
    }

    #[test]
    fn leaf_outcomes_match_recomputation() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for _ in 0..30 {
            let items = rng.gen_range(1..10);
            let pts: Vec<Point3> = (0..items)
                .map(|_| {
                    Point3::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    )
                })
                .collect();
            let len = rng.gen_range(1..120);
            let (init, tg) = random_toggles(&mut rng, items, len);
            let (inside, _) = spans_from_toggles(&init, &tg);
            let tree = SpanTree::build(&inside, len).unwrap();
            let r = rng.gen_range(0.3..1.2);
            let mini = evaluate_leaves(&tree, &mut MiniballPredicate::new(&pts, r, tol));
            let poly = evaluate_leaves(&tree, &mut PolytopePredicate::new(&pts, r, tol));
            let truth = simulate(&init, &tg);
            for leaf in 0..len {
                let set: Vec<usize> = (0..items).filter(|&k| truth[leaf][k]).collect();
                let want = MiniballPredicate {
                    points: &pts,
                    r,
                    tol,
                    prune: false,
                }
                .status(&set);
                assert_eq!(
                    std::mem::discriminant(&mini[leaf]),
                    std::mem::discriminant(&want)
                );
                assert_eq!(
                    std::mem::discriminant(&poly[leaf]),
                    std::mem::discriminant(&want),
                    "leaf {leaf}"
                );
            }
        }
    }
}
