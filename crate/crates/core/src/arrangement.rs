//! Plane arrangements in three dimensions: cell enumeration by sign vector,
//! single-toggle tours over the cells, plane classification against
//! (possibly unbounded) simplices, and verified random-sampling cuttings.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{solve3, Plane, Point3, Tolerance, Vec3};

/// Full-dimensional cell of an arrangement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// `+1` above / `-1` below each plane.
    pub signs: Vec<i8>,
    pub rep: Point3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TourStep {
    pub cell: usize,
    /// Plane crossed to reach this cell; `None` for the start.
    pub toggled: Option<usize>,
}

/// Walk over arrangement cells in which consecutive cells differ in one sign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellTour {
    pub steps: Vec<TourStep>,
}

impl CellTour {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Closed region `conv(vertices) + cone(rays)`. No vertices and no rays
/// stands for the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    pub vertices: Vec<Point3>,
    pub rays: Vec<Vec3>,
}

impl Simplex {
    pub fn whole_space() -> Self {
        Simplex {
            vertices: Vec::new(),
            rays: Vec::new(),
        }
    }

    pub fn is_whole_space(&self) -> bool {
        self.vertices.is_empty() && self.rays.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty() && !self.vertices.is_empty()
    }

    /// Point of the region for barycentric weights `wv` (summing to 1)
    /// on vertices and nonnegative weights `wr` on rays.
    pub fn combine(&self, wv: &[f64], wr: &[f64]) -> Point3 {
        let mut p = Point3::ORIGIN;
        for (v, w) in self.vertices.iter().zip(wv) {
            p += *v * *w;
        }
        for (r, w) in self.rays.iter().zip(wr) {
            p += *r * *w;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutting {
    pub simplices: Vec<Simplex>,
    /// Planes meeting the interior of each simplex.
    pub crossing: Vec<Vec<usize>>,
    pub sample_size: usize,
    pub attempts: usize,
}

impl Cutting {
    pub fn size(&self) -> usize {
        self.simplices.len()
    }

    pub fn max_crossing(&self) -> usize {
        self.crossing.iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of cells of a simple arrangement of `n` planes in three dimensions.
pub fn generic_cell_count(n: usize) -> usize {
    (0..=3).map(|i| binom(n, i)).sum()
}

fn plane_scale(planes: &[Plane]) -> f64 {
    planes.iter().map(|h| h.offset.abs()).fold(1.0, f64::max)
}

fn triple_vertex(planes: &[Plane], i: usize, j: usize, k: usize) -> Option<Point3> {
    solve3(
        [
            planes[i].normal.vec(),
            planes[j].normal.vec(),
            planes[k].normal.vec(),
        ],
        [planes[i].offset, planes[j].offset, planes[k].offset],
    )
}

// sign vectors and representatives of the 8 cells around a simple vertex
fn cells_around(
    planes: &[Plane],
    ids: [usize; 3],
    v: Point3,
    zero: f64,
) -> Result<Vec<(Vec<i8>, Point3)>> {
    let mut base = vec![0i8; planes.len()];
    let mut clearance = f64::INFINITY;
    for (l, h) in planes.iter().enumerate() {
        if ids.contains(&l) {
            continue;
        }
        let e = h.eval(v);
        if e.abs() <= zero {
            return Err(Error::DegenerateArrangement);
        }
        base[l] = if e > 0.0 { 1 } else { -1 };
        clearance = clearance.min(e.abs());
    }
    if !clearance.is_finite() {
        clearance = 1.0;
    }
    let rows = [
        planes[ids[0]].normal.vec(),
        planes[ids[1]].normal.vec(),
        planes[ids[2]].normal.vec(),
    ];
    let mut out = Vec::with_capacity(8);
    for mask in 0..8u8 {
        let s: [f64; 3] = std::array::from_fn(|b| if mask >> b & 1 == 1 { 1.0 } else { -1.0 });
        let d = solve3(rows, s).ok_or(Error::DegenerateArrangement)?;
        let eps = 0.25 * clearance / d.norm().max(1.0);
        let mut signs = base.clone();
        for b in 0..3 {
            signs[ids[b]] = s[b] as i8;
        }
        out.push((signs, v + d * eps));
    }
    Ok(out)
}

/// Enumerates every full-dimensional cell of the arrangement.
///
/// Planes must be in general position; a missing or surplus cell (relative to
/// the generic count) is reported as [`Error::DegenerateArrangement`] so the
/// caller can perturb its input and retry.
pub fn enumerate_cells(planes: &[Plane], tol: &Tolerance) -> Result<Vec<Cell>> {
    let n = planes.len();
    let zero = tol.slack(plane_scale(planes));
    let mut cells: HashMap<Vec<i8>, Point3> = HashMap::new();
    match n {
        0 => {
            cells.insert(Vec::new(), Point3::ORIGIN);
        }
        1 => {
            let h = planes[0];
            let p = h.normal.vec() * h.offset;
            cells.insert(vec![1], p + h.normal.vec());
            cells.insert(vec![-1], p - h.normal.vec());
        }
        2 => {
            let (a, b) = (planes[0].normal.vec(), planes[1].normal.vec());
            let line = a.cross(b);
            if line.norm() <= 1e-12 {
                return Err(Error::DegenerateArrangement);
            }
            let p0 = solve3([a, b, line], [planes[0].offset, planes[1].offset, 0.0])
                .ok_or(Error::DegenerateArrangement)?;
            for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let d = solve3([a, b, line], [sa, sb, 0.0]).ok_or(Error::DegenerateArrangement)?;
                cells.insert(vec![sa as i8, sb as i8], p0 + d);
            }
        }
        _ => {
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        let v =
                            triple_vertex(planes, i, j, k).ok_or(Error::DegenerateArrangement)?;
                        for (s, rep) in cells_around(planes, [i, j, k], v, zero)? {
                            cells.entry(s).or_insert(rep);
                        }
                    }
                }
            }
        }
    }
    if cells.len() != generic_cell_count(n) {
        return Err(Error::DegenerateArrangement);
    }
    let mut out: Vec<Cell> = cells
        .into_iter()
        .map(|(signs, rep)| Cell { signs, rep })
        .collect();
    out.sort_by(|a, b| a.signs.cmp(&b.signs));
    Ok(out)
}

/// Depth-first walk over the Hamming-1 adjacency graph of the cells.
///
/// Backtracking re-enters cells, so every step toggles exactly one plane;
/// the walk stops once the last cell has been reached.
pub fn build_tour(cells: &[Cell]) -> Result<CellTour> {
    if cells.is_empty() {
        return Ok(CellTour { steps: Vec::new() });
    }
    let index: HashMap<&[i8], usize> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c.signs.as_slice(), i))
        .collect();
    let m = cells[0].signs.len();
    let mut visited = vec![false; cells.len()];
    let mut seen = 1;
    visited[0] = true;
    let mut steps = vec![TourStep {
        cell: 0,
        toggled: None,
    }];
    // (cell, next plane to try, plane used to enter)
    let mut stack: Vec<(usize, usize, Option<usize>)> = vec![(0, 0, None)];
    let mut key = vec![0i8; m];
    while let Some(top) = stack.last_mut() {
        if seen == cells.len() {
            break;
        }
        let (c, next, _) = *top;
        if next < m {
            top.1 += 1;
            key.copy_from_slice(&cells[c].signs);
            key[next] = -key[next];
            if let Some(&nb) = index.get(key.as_slice()) {
                if !visited[nb] {
                    visited[nb] = true;
                    seen += 1;
                    steps.push(TourStep {
                        cell: nb,
                        toggled: Some(next),
                    });
                    stack.push((nb, 0, Some(next)));
                }
            }
        } else {
            let (_, _, via) = stack.pop().unwrap();
            if let (Some(k), Some(parent)) = (via, stack.last()) {
                steps.push(TourStep {
                    cell: parent.0,
                    toggled: Some(k),
                });
            }
        }
    }
    if seen != cells.len() {
        return Err(Error::DisconnectedAdjacency);
    }
    Ok(CellTour { steps })
}

/// Sign of plane `h` over the region: `-1` if the region lies weakly below
/// it, `+1` if weakly above, `0` if the plane meets the interior.
fn region_side(s: &Simplex, h: &Plane, zero: f64) -> i8 {
    if s.is_whole_space() {
        return 0;
    }
    let (mut pos, mut neg) = (false, false);
    for v in &s.vertices {
        let e = h.eval(*v);
        pos |= e > zero;
        neg |= e < -zero;
    }
    for r in &s.rays {
        let e = h.normal.vec().dot(*r) / r.norm();
        pos |= e > 1e-12;
        neg |= e < -1e-12;
    }
    match (pos, neg) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => -1,
        (false, false) => 0,
    }
}

/// Partitions planes into those passing above the simplex, below it, and
/// crossing its interior.
pub fn classify_planes(
    simplex: &Simplex,
    planes: &[Plane],
    tol: &Tolerance,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let zero = tol.slack(plane_scale(planes));
    let (mut above, mut below, mut crossing) = (Vec::new(), Vec::new(), Vec::new());
    for (i, h) in planes.iter().enumerate() {
        match region_side(simplex, h, zero) {
            // region below the plane: plane passes above
            -1 => above.push(i),
            1 => below.push(i),
            _ => crossing.push(i),
        }
    }
    (above, below, crossing)
}

type Gen = [f64; 4];

fn rank(vecs: &[Gen]) -> usize {
    let mut m: Vec<Gen> = vecs
        .iter()
        .map(|g| {
            let n = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            g.map(|x| x / n)
        })
        .collect();
    let mut r = 0;
    for col in 0..4 {
        let Some(piv) = (r..m.len()).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
        else {
            break;
        };
        if m[piv][col].abs() <= 1e-9 {
            continue;
        }
        m.swap(r, piv);
        for i in 0..m.len() {
            if i != r {
                let f = m[i][col] / m[r][col];
                for c in 0..4 {
                    m[i][c] -= f * m[r][c];
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

// pulling triangulation of the cone spanned by `gens` (a face of dimension `dim`)
fn pull(gens: &[usize], all: &[Gen], cons: &[Gen], dim: usize, out: &mut Vec<Vec<usize>>) {
    if dim == 1 {
        out.push(vec![gens[0]]);
        return;
    }
    if gens.len() == dim {
        out.push(gens.to_vec());
        return;
    }
    // apex: a finite point (last coordinate 1) when available
    let apex = *gens.iter().find(|&&g| all[g][3] > 0.5).unwrap_or(&gens[0]);
    let mut facets: Vec<Vec<usize>> = Vec::new();
    for c in cons {
        let val = |g: usize| c.iter().zip(all[g].iter()).map(|(a, b)| a * b).sum::<f64>();
        if val(apex).abs() <= 1e-9 {
            continue;
        }
        let f: Vec<usize> = gens
            .iter()
            .copied()
            .filter(|&g| val(g).abs() <= 1e-9)
            .collect();
        if f.len() + 1 < dim || facets.contains(&f) {
            continue;
        }
        let pts: Vec<Gen> = f.iter().map(|&g| all[g]).collect();
        if rank(&pts) == dim - 1 {
            facets.push(f);
        }
    }
    for f in facets {
        let mut sub = Vec::new();
        pull(&f, all, cons, dim - 1, &mut sub);
        for mut s in sub {
            s.push(apex);
            out.push(s);
        }
    }
}

/// Triangulates the polyhedron with the given vertices and recession rays,
/// bounded by `s_k (n_k·x − d_k) ≥ 0` for the listed oriented planes.
fn triangulate_cell(verts: &[Point3], rays: &[Vec3], planes: &[(Plane, i8)]) -> Vec<Simplex> {
    let mut all: Vec<Gen> = verts.iter().map(|v| [v.x, v.y, v.z, 1.0]).collect();
    all.extend(rays.iter().map(|r| {
        let r = r.normalized();
        [r.x, r.y, r.z, 0.0]
    }));
    let mut cons: Vec<Gen> = planes
        .iter()
        .map(|(h, s)| {
            let n = h.normal.vec() * *s as f64;
            [n.x, n.y, n.z, -h.offset * *s as f64]
        })
        .collect();
    cons.push([0.0, 0.0, 0.0, 1.0]);
    let ids: Vec<usize> = (0..all.len()).collect();
    let mut simp = Vec::new();
    pull(&ids, &all, &cons, 4, &mut simp);
    simp.into_iter()
        .map(|s| {
            let mut out = Simplex {
                vertices: Vec::new(),
                rays: Vec::new(),
            };
            for g in s {
                let a = all[g];
                if a[3] > 0.5 {
                    out.vertices.push(Point3::new(a[0], a[1], a[2]));
                } else {
                    out.rays.push(Point3::new(a[0], a[1], a[2]));
                }
            }
            out
        })
        .collect()
}

/// Triangulates every cell of the arrangement of `planes` (which must be in
/// general position, at least three of them).
fn triangulate_arrangement(planes: &[Plane], tol: &Tolerance) -> Result<Vec<Simplex>> {
    let n = planes.len();
    let zero = tol.slack(plane_scale(planes));
    let mut verts: HashMap<Vec<i8>, Vec<Point3>> = HashMap::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let v = triple_vertex(planes, i, j, k).ok_or(Error::DegenerateArrangement)?;
                for (s, _) in cells_around(planes, [i, j, k], v, zero)? {
                    verts.entry(s).or_default().push(v);
                }
            }
        }
    }
    if verts.len() != generic_cell_count(n) {
        return Err(Error::DegenerateArrangement);
    }
    let mut rays: HashMap<Vec<i8>, Vec<Vec3>> = HashMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let line = planes[i].normal.vec().cross(planes[j].normal.vec());
            for d in [line, -line] {
                let mut key: Vec<i8> = Vec::with_capacity(n);
                let mut ok = true;
                for (k, h) in planes.iter().enumerate() {
                    if k == i || k == j {
                        key.push(0);
                        continue;
                    }
                    let e = h.normal.vec().dot(d);
                    if e.abs() <= 1e-12 * d.norm() {
                        ok = false;
                        break;
                    }
                    key.push(if e > 0.0 { 1 } else { -1 });
                }
                if !ok {
                    return Err(Error::DegenerateArrangement);
                }
                for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    key[i] = si;
                    key[j] = sj;
                    if verts.contains_key(&key) {
                        rays.entry(key.clone()).or_default().push(d);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut keys: Vec<&Vec<i8>> = verts.keys().collect();
    keys.sort();
    for key in keys {
        let vs = &verts[key];
        let rs = rays.get(key).map(Vec::as_slice).unwrap_or(&[]);
        let oriented: Vec<(Plane, i8)> = planes.iter().copied().zip(key.iter().copied()).collect();
        out.extend(triangulate_cell(vs, rs, &oriented));
    }
    Ok(out)
}

/// Builds a verified `(1/ρ)`-cutting: every simplex is crossed by at most
/// `n / ρ` of the planes. Random samples of the planes are triangulated and
/// checked; failures resample with a larger sample.
pub fn build_cutting(planes: &[Plane], rho: usize, seed: u64, tol: &Tolerance) -> Result<Cutting> {
    assert!(rho >= 1, "rho must be positive");
    let n = planes.len();
    let bound = n / rho;
    if rho == 1 {
        return Ok(Cutting {
            simplices: vec![Simplex::whole_space()],
            crossing: vec![(0..n).collect()],
            sample_size: 0,
            attempts: 1,
        });
    }
    let zero = tol.slack(plane_scale(planes));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rf = rho as f64;
    let mut s = ((2.0 * rf * (rf + 1.0).ln()).ceil() as usize).max(3);
    const MAX_ATTEMPTS: usize = 50;
    for attempt in 1..=MAX_ATTEMPTS {
        let size = s.min(n);
        let mut idx = sample(&mut rng, n, size).into_vec();
        idx.sort_unstable();
        let mut sub: Vec<Plane> = idx.iter().map(|&i| planes[i]).collect();
        // fewer than three planes: pad with random auxiliary planes
        while sub.len() < 3 {
            let d = Point3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            sub.push(Plane::new(d, rng.gen_range(-1.0..1.0)));
        }
        let simplices = match triangulate_arrangement(&sub, tol) {
            Ok(v) => v,
            Err(Error::DegenerateArrangement) => continue,
            Err(e) => return Err(e),
        };
        let mut crossing = Vec::with_capacity(simplices.len());
        let mut ok = true;
        for sx in &simplices {
            let c: Vec<usize> = (0..n)
                .filter(|&i| region_side(sx, &planes[i], zero) == 0)
                .collect();
            if c.len() > bound {
                ok = false;
                break;
            }
            crossing.push(c);
        }
        if ok {
            return Ok(Cutting {
                simplices,
                crossing,
                sample_size: size,
                attempts: attempt,
            });
        }
        s = ((s as f64) * 1.25).ceil() as usize;
    }
    Err(Error::CuttingFailure(MAX_ATTEMPTS))
}

/// Deterministically perturbs plane offsets and normals by about `magnitude`.
pub fn perturb_planes(planes: &[Plane], magnitude: f64, seed: u64) -> Vec<Plane> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    planes
        .iter()
        .map(|h| {
            let n = h.normal.vec();
            let jit = Point3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            Plane::new(
                n + jit * magnitude,
                h.offset + rng.gen_range(-1.0..1.0) * magnitude,
            )
        })
        .collect()
}
