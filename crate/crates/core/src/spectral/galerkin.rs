//! Cell-averaged transition matrices.
//!
//! For cells `C_i` the joint masses `J_ij = π(dx)P(x,dy)(C_i × C_j)` of a slice
//! kernel are `c⁻¹ ∫_T ∫_{C_i ∩ G(t)} H_t(x, C_j) ν(dx) dt`. Every on-slice
//! kernel here is a combination of product measures on slice pieces plus a
//! holding atom, so the integrand reduces to products of `a_i(t) = ν(C_i ∩ G(t))`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, LevelSetShape};
use crate::kernels::stepping_out_lambda;
use crate::quadrature::{self, QuadConfig};
use crate::target::{Family, Target};

use super::grid::Grid;

/// Kernels with a closed-form description usable for matrix assembly.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixKernel {
    Identity,
    /// Every row equals `π`.
    Independent,
    /// The ideal slice sampler `U`.
    Ideal,
    /// Hybrid slice sampler with the independent-Metropolis on-slice kernel.
    HybridIm,
    /// Hybrid slice sampler with stepping out and shrinkage of width `h`.
    SteppingOut { h: f64 },
    /// Metropolis with independent proposals from `ν`.
    MetropolisIm,
    Lazy(Box<MatrixKernel>),
}

impl MatrixKernel {
    pub fn name(&self) -> String {
        match self {
            MatrixKernel::Identity => "identity".into(),
            MatrixKernel::Independent => "independent".into(),
            MatrixKernel::Ideal => "ideal".into(),
            MatrixKernel::HybridIm => "hybrid:im".into(),
            MatrixKernel::SteppingOut { h } => format!("hybrid:stepout(h={h})"),
            MatrixKernel::MetropolisIm => "metropolis:im".into(),
            MatrixKernel::Lazy(k) => format!("lazy:{}", k.name()),
        }
    }
}

/// One weighted product-measure term and the cells it touches on a piece.
struct Term {
    /// `None` for the whole slice, `Some(k)` for piece `k` only.
    component: Option<usize>,
    partial: Vec<usize>,
    full: Vec<(usize, usize)>,
}

impl Term {
    fn width(&self) -> usize {
        let p = self.partial.len();
        1 + p + p * (p + 1) / 2
    }
}

struct Piece {
    a: f64,
    b: f64,
    components: usize,
    terms: Vec<Term>,
    atom_partial: Vec<usize>,
    atom_full: Vec<(usize, usize)>,
    has_atom: bool,
}

struct PieceResult {
    values: Vec<f64>,
}

fn intervals(target: &Target, t: f64) -> Result<Vec<(f64, f64)>> {
    match geometry::level_shape(target, t)? {
        LevelSetShape::Intervals(iv) => Ok(iv),
        _ => Err(Error::Unsupported("matrix assembly needs interval slices".into())),
    }
}

/// Splits the cells meeting `(lo, hi)` into partially and fully covered ones.
fn classify(grid: &Grid, lo: f64, hi: f64) -> (Vec<usize>, Option<(usize, usize)>) {
    let first = grid.cell_of(lo);
    let last = grid.cell_of_upper(hi);
    let full_cell = |i: usize| grid.edges[i] >= lo && grid.edges[i + 1] <= hi;
    let mut partial = Vec::new();
    let mut start = first;
    let mut end = last + 1;
    if !full_cell(first) {
        partial.push(first);
        start = first + 1;
    }
    if last != first && !full_cell(last) {
        partial.push(last);
        end = last;
    }
    let full = (start < end).then_some((start, end));
    (partial, full)
}

fn union_sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Heights at which the cell structure of the slices changes.
fn breakpoints(target: &Target, grid: &Grid) -> Result<(Vec<f64>, f64)> {
    let sup = target
        .sup_density()
        .ok_or_else(|| Error::Unsupported("matrix assembly needs the target's own reference".into()))?
        .value();
    let mut hs: Vec<f64> = grid
        .edges
        .iter()
        .filter(|e| e.is_finite())
        .map(|e| target.density_or_zero(&[*e]))
        .collect();
    let consts = geometry::bimodal_constants(target);
    if !consts.is_unimodal() {
        hs.push(consts.t1);
        hs.push(consts.t2);
    }
    if sup.is_infinite() {
        hs.push(1.0);
    }
    hs.retain(|h| *h > 0.0 && *h < sup);
    hs.push(0.0);
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    Ok((hs, sup))
}

fn build_pieces(kernel: &MatrixKernel, target: &Target, grid: &Grid) -> Result<Vec<Piece>> {
    let (hs, sup) = breakpoints(target, grid)?;
    let mut ends = hs.clone();
    ends.push(sup);
    let mut pieces = Vec::new();
    for w in ends.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let mid = if b.is_infinite() { 2.0 * a + 1.0 } else { a + 0.5 * (b - a) };
        let comps = intervals(target, mid)?;
        if comps.is_empty() {
            continue;
        }
        let classified: Vec<_> = comps.iter().map(|(lo, hi)| classify(grid, *lo, *hi)).collect();
        let all_partial = union_sorted(classified.iter().flat_map(|c| c.0.clone()).collect());
        let all_full: Vec<(usize, usize)> = classified.iter().filter_map(|c| c.1).collect();
        let mut terms = vec![Term { component: None, partial: all_partial.clone(), full: all_full.clone() }];
        if matches!(kernel, MatrixKernel::SteppingOut { .. }) && comps.len() > 1 {
            for (k, (p, f)) in classified.iter().enumerate() {
                terms.push(Term { component: Some(k), partial: p.clone(), full: f.iter().copied().collect() });
            }
        }
        pieces.push(Piece {
            a,
            b,
            components: comps.len(),
            terms,
            atom_partial: all_partial,
            atom_full: all_full,
            has_atom: matches!(kernel, MatrixKernel::HybridIm),
        });
    }
    Ok(pieces)
}

fn integrate_piece(kernel: &MatrixKernel, target: &Target, grid: &Grid, piece: &Piece) -> Result<PieceResult> {
    let width: usize = piece.terms.iter().map(Term::width).sum::<usize>()
        + if piece.has_atom { 1 + piece.atom_partial.len() } else { 0 };
    let reference = target.reference();
    let consts = geometry::bimodal_constants(target);
    let fill = |t: f64, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        let comps = match intervals(target, t) {
            Ok(c) if c.len() == piece.components => c,
            _ => return,
        };
        let masses: Vec<f64> = comps.iter().map(|(a, b)| reference.interval_mass(*a, *b)).collect();
        let m: f64 = masses.iter().sum();
        if !(m > 0.0) {
            return;
        }
        let lambda = match kernel {
            MatrixKernel::SteppingOut { h } if comps.len() > 1 => stepping_out_lambda(*h, consts.delta(t), m),
            _ => 1.0,
        };
        let overlap = |cell: usize, comp: Option<usize>| -> f64 {
            let (ea, eb) = (grid.edges[cell], grid.edges[cell + 1]);
            comps
                .iter()
                .enumerate()
                .filter(|(k, _)| comp.is_none_or(|c| c == *k))
                .map(|(_, (lo, hi))| reference.interval_mass(lo.max(ea), hi.min(eb)))
                .sum()
        };
        let mut off = 0;
        for term in &piece.terms {
            let w = match (kernel, term.component) {
                (MatrixKernel::Ideal, _) => 1.0 / m,
                (MatrixKernel::HybridIm, _) => 1.0,
                (MatrixKernel::SteppingOut { .. }, None) => lambda / m,
                (MatrixKernel::SteppingOut { .. }, Some(k)) => (1.0 - lambda) / masses[k],
                _ => 0.0,
            };
            let a: Vec<f64> = term.partial.iter().map(|p| overlap(*p, term.component)).collect();
            // Products with whole cells only matter when some cell is fully covered.
            let wf = if term.full.is_empty() { 0.0 } else { w };
            out[off] = wf;
            off += 1;
            for ap in &a {
                out[off] = wf * ap;
                off += 1;
            }
            for i in 0..a.len() {
                for j in i..a.len() {
                    out[off] = w * a[i] * a[j];
                    off += 1;
                }
            }
        }
        if piece.has_atom {
            let hold = (1.0 - m).max(0.0);
            out[off] = if piece.atom_full.is_empty() { 0.0 } else { hold };
            off += 1;
            for p in &piece.atom_partial {
                out[off] = hold * overlap(*p, None);
                off += 1;
            }
        }
    };
    let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 2000 };
    let r = if piece.b.is_infinite() {
        quadrature::integrate_vec_to_inf(fill, piece.a, width, cfg)
    } else {
        quadrature::integrate_vec(fill, piece.a, piece.b, width, cfg)
    };
    let scale = r.value.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if r.value.iter().any(|v| !v.is_finite()) || r.error > 1e-10 * scale {
        return Err(Error::Quadrature(format!(
            "slice integral on [{}, {}] has error estimate {:e}",
            piece.a, piece.b, r.error
        )));
    }
    Ok(PieceResult { values: r.value })
}

/// Rectangle additions accumulated with a 2D difference array.
struct BlockAdder {
    n: usize,
    d: Vec<f64>,
}

impl BlockAdder {
    fn new(n: usize) -> Self {
        BlockAdder { n, d: vec![0.0; (n + 1) * (n + 1)] }
    }

    fn add(&mut self, rows: (usize, usize), cols: (usize, usize), v: f64) {
        let w = self.n + 1;
        self.d[rows.0 * w + cols.0] += v;
        self.d[rows.0 * w + cols.1] -= v;
        self.d[rows.1 * w + cols.0] -= v;
        self.d[rows.1 * w + cols.1] += v;
    }

    fn finish(self) -> DMatrix<f64> {
        let w = self.n + 1;
        let mut s = self.d;
        for i in 0..w {
            for j in 1..w {
                s[i * w + j] += s[i * w + j - 1];
            }
        }
        for i in 1..w {
            for j in 0..w {
                s[i * w + j] += s[(i - 1) * w + j];
            }
        }
        DMatrix::from_fn(self.n, self.n, |i, j| s[i * w + j])
    }
}

fn slice_joint(kernel: &MatrixKernel, target: &Target, grid: &Grid) -> Result<DMatrix<f64>> {
    let n = grid.len();
    let pieces = build_pieces(kernel, target, grid)?;
    let results: Vec<PieceResult> = pieces
        .par_iter()
        .map(|p| integrate_piece(kernel, target, grid, p))
        .collect::<Result<_>>()?;
    let nu = &grid.nu_mass;
    let mut blocks = BlockAdder::new(n);
    let mut diag = vec![0.0; n + 1];
    let mut j = DMatrix::<f64>::zeros(n, n);
    for (piece, res) in pieces.iter().zip(&results) {
        let v = &res.values;
        let mut off = 0;
        for term in &piece.terms {
            let w = v[off];
            off += 1;
            for r1 in &term.full {
                for r2 in &term.full {
                    blocks.add(*r1, *r2, w);
                }
            }
            let np = term.partial.len();
            for &p in &term.partial {
                let wp = v[off];
                off += 1;
                for r in &term.full {
                    for col in r.0..r.1 {
                        let add = wp * nu[col];
                        j[(p, col)] += add;
                        j[(col, p)] += add;
                    }
                }
            }
            for a in 0..np {
                for b in a..np {
                    let (p, q) = (term.partial[a], term.partial[b]);
                    j[(p, q)] += v[off];
                    if p != q {
                        j[(q, p)] += v[off];
                    }
                    off += 1;
                }
            }
        }
        if piece.has_atom {
            let hold = v[off];
            off += 1;
            for r in &piece.atom_full {
                diag[r.0] += hold;
                diag[r.1] -= hold;
            }
            for &p in &piece.atom_partial {
                j[(p, p)] += v[off];
                off += 1;
            }
        }
    }
    let block = blocks.finish();
    let mut running = 0.0;
    for i in 0..n {
        running += diag[i];
        // Unbounded cells are never covered by a bounded slice, so any weight
        // there is round-off from the difference arrays.
        if running != 0.0 && nu[i].is_finite() {
            j[(i, i)] += running * nu[i];
        }
        for k in 0..n {
            let b = block[(i, k)];
            if b != 0.0 && nu[i].is_finite() && nu[k].is_finite() {
                j[(i, k)] += b * nu[i] * nu[k];
            }
        }
    }
    let c = target.normalizer();
    j /= c;
    Ok(symmetrize(j))
}

fn symmetrize(j: DMatrix<f64>) -> DMatrix<f64> {
    let t = j.transpose();
    (j + t) * 0.5
}

/// Independent-Metropolis joint masses from `min{ϖ(x), ϖ(y)}` on a target
/// with monotone density.
fn metropolis_im_joint(target: &Target, grid: &Grid) -> Result<DMatrix<f64>> {
    let Family::Exp { alpha, lambda } = target.family() else {
        return Err(Error::Unsupported("Metropolis matrix needs a monotone density".into()));
    };
    if !target.reference().is_probability() {
        return Err(Error::Mismatch("independent proposals need a probability reference".into()));
    }
    let n = grid.len();
    let decreasing = alpha >= lambda;
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for k in (i + 1)..n {
            // Cell k lies to the right of cell i.
            let v = if decreasing {
                grid.nu_mass[i] * grid.pi_mass[k]
            } else {
                grid.pi_mass[i] * grid.nu_mass[k]
            };
            j[(i, k)] = v;
            j[(k, i)] = v;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|k| *k != i).map(|k| j[(i, k)]).sum();
        j[(i, i)] = grid.pi_mass[i] - off;
    }
    Ok(j)
}

/// Joint masses `J_ij = ∫_{C_i} π(dx) P(x, C_j)`.
pub fn joint_masses(kernel: &MatrixKernel, target: &Target, grid: &Grid) -> Result<DMatrix<f64>> {
    let n = grid.len();
    match kernel {
        MatrixKernel::Identity => Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(grid.pi_mass.clone()))),
        MatrixKernel::Independent => Ok(DMatrix::from_fn(n, n, |i, k| grid.pi_mass[i] * grid.pi_mass[k])),
        MatrixKernel::MetropolisIm => metropolis_im_joint(target, grid),
        MatrixKernel::HybridIm if !target.reference().is_probability() => {
            Err(Error::Mismatch("independent proposals need a probability reference".into()))
        }
        MatrixKernel::SteppingOut { h } => {
            if !matches!(target.reference(), crate::target::ReferenceMeasure::Lebesgue { .. }) {
                return Err(Error::Mismatch("stepping out needs a Lebesgue reference".into()));
            }
            let delta = geometry::bimodal_constants(target).delta_max;
            if *h < delta {
                return Err(crate::error::invalid(format!("width {h} is below Δ = {delta}")));
            }
            slice_joint(kernel, target, grid)
        }
        MatrixKernel::Ideal | MatrixKernel::HybridIm => slice_joint(kernel, target, grid),
        MatrixKernel::Lazy(inner) => {
            let j = joint_masses(inner, target, grid)?;
            let rows: Vec<f64> = (0..n).map(|i| j.row(i).sum()).collect();
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(rows));
            Ok((j + d) * 0.5)
        }
    }
}
