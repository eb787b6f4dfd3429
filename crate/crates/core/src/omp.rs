//! Orthogonal Matching Pursuit.
//!
//! Each iteration picks the admissible atom most correlated with the current
//! residual, re-solves the coefficients of all selected atoms by least
//! squares, and updates the residual. Least squares is carried by an
//! incrementally grown QR factorization of the selected atoms (modified
//! Gram-Schmidt with one reorthogonalization pass), so every step is an exact
//! orthogonal projection. Correlations with the residual are refreshed through
//! the dictionary's Gram matrix: `D^T r = D^T y - G[:, S] x_S`.

use crate::basis::dot;
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};

/// Iteration stops once the best admissible correlation falls below this.
pub const CORRELATION_FLOOR: f64 = 1e-12;

/// Stopping criteria, applied before every iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    /// Stop once `||r||_2 <= residual_threshold`.
    pub residual_threshold: f64,
    /// Hard cap on selected atoms.
    pub max_atoms: usize,
}

impl StoppingRule {
    pub fn new(residual_threshold: f64, max_atoms: usize) -> Self {
        Self {
            residual_threshold,
            max_atoms,
        }
    }

    /// Noise-aware rule `||r|| <= gain * sigma * sqrt(d)`.
    pub fn noise_aware(gain: f64, sigma: f64, atom_dim: usize, max_atoms: usize) -> Self {
        Self::new(gain * sigma * (atom_dim as f64).sqrt(), max_atoms)
    }

    pub fn validate(&self, dict: &Dictionary) -> Result<()> {
        if !(self.residual_threshold.is_finite() && self.residual_threshold >= 0.0) {
            return Err(Error::invalid(format!(
                "residual threshold must be a finite non-negative number, got {}",
                self.residual_threshold
            )));
        }
        if self.max_atoms == 0 || self.max_atoms > dict.selectable() {
            return Err(Error::invalid(format!(
                "max_atoms must be in 1..={}, got {}",
                dict.selectable(),
                self.max_atoms
            )));
        }
        Ok(())
    }
}

/// Sparse representation of one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    /// `(atom index, coefficient)` in selection order.
    pub entries: Vec<(usize, f64)>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl SparseCode {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Step-by-step OMP state for one target signal.
pub struct Pursuit<'a> {
    dict: &'a Dictionary,
    initial_corr: Vec<f64>,
    corr: Vec<f64>,
    residual: Vec<f64>,
    residual_norm: f64,
    selected: Vec<usize>,
    chosen: Vec<bool>,
    // Orthonormal basis of span(selected atoms), one vector per selected atom.
    q: Vec<f64>,
    // Upper-triangular R, packed column by column.
    r: Vec<f64>,
    qty: Vec<f64>,
    coeffs: Vec<f64>,
}

impl<'a> Pursuit<'a> {
    pub fn new(dict: &'a Dictionary, target: &[f64]) -> Result<Self> {
        if target.len() != dict.atom_dim() {
            return Err(Error::invalid(format!(
                "target has dimension {}, dictionary atoms have {}",
                target.len(),
                dict.atom_dim()
            )));
        }
        if let Some(i) = target.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("target entry {i} is not finite")));
        }
        let mut initial_corr = vec![0.0; dict.num_atoms()];
        dict.correlate(target, &mut initial_corr);
        Ok(Self {
            dict,
            corr: initial_corr.clone(),
            initial_corr,
            residual: target.to_vec(),
            residual_norm: dot(target, target).sqrt(),
            selected: Vec::new(),
            chosen: vec![false; dict.num_atoms()],
            q: Vec::new(),
            r: Vec::new(),
            qty: Vec::new(),
            coeffs: Vec::new(),
        })
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Least-squares coefficients of the selected atoms, in selection order.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Best admissible atom and its absolute correlation; ties go to the
    /// lowest index.
    fn best_atom(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in self.corr.iter().enumerate() {
            if self.chosen[j] || self.dict.is_excluded(j) {
                continue;
            }
            let a = c.abs();
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((j, a));
            }
        }
        best
    }

    /// Runs one iteration. Returns the selected atom, or `None` when no
    /// admissible atom is correlated with the residual above
    /// [`CORRELATION_FLOOR`] (or the candidate is numerically dependent on the
    /// atoms already chosen).
    pub fn step(&mut self) -> Option<usize> {
        let (j, score) = self.best_atom()?;
        if !(score >= CORRELATION_FLOOR) {
            return None;
        }

        let d = self.dict.atom_dim();
        let t = self.selected.len();
        let atom = self.dict.atom(j);
        let mut v = atom.to_vec();
        let mut rcol = vec![0.0; t + 1];
        for _ in 0..2 {
            for i in 0..t {
                let qi = &self.q[i * d..(i + 1) * d];
                let h = dot(qi, &v);
                rcol[i] += h;
                v.iter_mut().zip(qi).for_each(|(a, b)| *a -= h * b);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= 1e-10 * dot(atom, atom).sqrt() {
            return None;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        rcol[t] = norm;

        let proj = dot(&v, &self.residual);
        self.residual
            .iter_mut()
            .zip(&v)
            .for_each(|(a, b)| *a -= proj * b);
        self.residual_norm = dot(&self.residual, &self.residual).sqrt();

        self.q.extend_from_slice(&v);
        self.r.extend_from_slice(&rcol);
        self.qty.push(proj);
        self.selected.push(j);
        self.chosen[j] = true;
        self.solve_coefficients();
        self.refresh_correlations();
        Some(j)
    }

    fn solve_coefficients(&mut self) {
        let t = self.selected.len();
        let col_start = |k: usize| k * (k + 1) / 2;
        let mut x = self.qty.clone();
        for i in (0..t).rev() {
            let mut acc = x[i];
            for k in (i + 1)..t {
                acc -= self.r[col_start(k) + i] * x[k];
            }
            x[i] = acc / self.r[col_start(i) + i];
        }
        self.coeffs = x;
    }

    fn refresh_correlations(&mut self) {
        self.corr.copy_from_slice(&self.initial_corr);
        for (&s, &x) in self.selected.iter().zip(&self.coeffs) {
            let g = self.dict.gram_column(s);
            self.corr.iter_mut().zip(g).for_each(|(c, gs)| *c -= gs * x);
        }
    }

    pub fn into_code(self) -> SparseCode {
        let iterations = self.selected.len();
        SparseCode {
            entries: self.selected.into_iter().zip(self.coeffs).collect(),
            residual_norm: self.residual_norm,
            iterations,
        }
    }
}

/// Sparse-code `target` against `dict` until `rule` is met.
pub fn omp_encode(dict: &Dictionary, target: &[f64], rule: &StoppingRule) -> Result<SparseCode> {
    rule.validate(dict)?;
    let mut pursuit = Pursuit::new(dict, target)?;
    while pursuit.residual_norm() > rule.residual_threshold && pursuit.selected().len() < rule.max_atoms {
        if pursuit.step().is_none() {
            break;
        }
    }
    Ok(pursuit.into_code())
}

/// `sum coefficient * atom` over the code's entries.
pub fn reconstruct(dict: &Dictionary, code: &SparseCode) -> Result<Vec<f64>> {
    let mut out = vec![0.0; dict.atom_dim()];
    for &(j, c) in &code.entries {
        if j >= dict.num_atoms() {
            return Err(Error::invalid(format!(
                "atom index {j} out of range (dictionary has {} atoms)",
                dict.num_atoms()
            )));
        }
        out.iter_mut().zip(dict.atom(j)).for_each(|(o, a)| *o += c * a);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisKind;
    use crate::dictionary::build_dictionary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dct12() -> Dictionary {
        build_dictionary(BasisKind::Dct, 12, 0.5, 0.5).unwrap()
    }

    fn random_dictionary(rng: &mut ChaCha8Rng, dim: usize, atoms: usize) -> Dictionary {
        let cols: Vec<Vec<f64>> = (0..atoms)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        Dictionary::from_columns(dim, &cols).unwrap()
    }

    /// Normal-equations solve by Gaussian elimination with partial pivoting.
    fn scratch_least_squares(dict: &Dictionary, support: &[usize], y: &[f64]) -> Vec<f64> {
        let k = support.len();
        let mut a = vec![vec![0.0; k + 1]; k];
        for i in 0..k {
            for j in 0..k {
                a[i][j] = dict.atom(support[i]).iter().zip(dict.atom(support[j])).map(|(p, q)| p * q).sum();
            }
            a[i][k] = dict.atom(support[i]).iter().zip(y).map(|(p, q)| p * q).sum();
        }
        for c in 0..k {
            let piv = (c..k).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
            a.swap(c, piv);
            for r in 0..k {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for cc in c..=k {
                        a[r][cc] -= f * a[c][cc];
                    }
                }
            }
        }
        (0..k).map(|i| a[i][k] / a[i][i]).collect()
    }

    #[test]
    fn single_atom_target() {
        let d = dct12();
        let target: Vec<f64> = d.atom(7).iter().map(|v| 3.0 * v).collect();
        let code = omp_encode(&d, &target, &StoppingRule::new(0.0, 36)).unwrap();
        assert_eq!(code.iterations, 1);
        assert_eq!(code.entries.len(), 1);
        assert_eq!(code.entries[0].0, 7);
        assert!((code.entries[0].1 - 3.0).abs() < 1e-10);
        assert!(code.residual_norm < 1e-10);
    }

    #[test]
    fn zero_target() {
        let d = dct12();
        let code = omp_encode(&d, &[0.0; 144], &StoppingRule::new(0.0, 36)).unwrap();
        assert!(code.entries.is_empty());
        assert_eq!(code.residual_norm, 0.0);
        assert_eq!(code.iterations, 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = dct12();
        let rule = StoppingRule::new(0.0, 10);
        assert!(omp_encode(&d, &[0.0; 10], &rule).is_err());
        let mut t = vec![0.0; 144];
        t[3] = f64::NAN;
        assert!(omp_encode(&d, &t, &rule).is_err());
        t[3] = f64::INFINITY;
        assert!(omp_encode(&d, &t, &rule).is_err());
        let ok = vec![1.0; 144];
        assert!(omp_encode(&d, &ok, &StoppingRule::new(0.0, 0)).is_err());
        assert!(omp_encode(&d, &ok, &StoppingRule::new(0.0, 144)).is_err());
        assert!(omp_encode(&d, &ok, &StoppingRule::new(0.0, 143)).is_ok());
        assert!(omp_encode(&d, &ok, &StoppingRule::new(-1.0, 5)).is_err());
    }

    #[test]
    fn orthonormal_selection_matches_sorted_correlations() {
        let d = build_dictionary(BasisKind::Tchebichef, 12, 0.5, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for k in [1, 5, 17, 36] {
            let y: Vec<f64> = (0..144).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let code = omp_encode(&d, &y, &StoppingRule::new(0.0, k)).unwrap();

            let mut corr: Vec<(usize, f64)> = (1..144)
                .map(|j| (j, d.atom(j).iter().zip(&y).map(|(a, b)| a * b).sum()))
                .collect();
            corr.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
            assert_eq!(code.entries.len(), k);
            for ((j, c), (oj, oc)) in code.entries.iter().zip(&corr[..k]) {
                assert_eq!(j, oj);
                assert!((c - oc).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reconstruct_basics() {
        let d = dct12();
        let empty = SparseCode {
            entries: vec![],
            residual_norm: 0.0,
            iterations: 0,
        };
        assert!(reconstruct(&d, &empty).unwrap().iter().all(|&v| v == 0.0));
        let one = SparseCode {
            entries: vec![(3, 2.5)],
            residual_norm: 0.0,
            iterations: 1,
        };
        let out = reconstruct(&d, &one).unwrap();
        for (o, a) in out.iter().zip(d.atom(3)) {
            assert_eq!(*o, 2.5 * a);
        }
        let bad = SparseCode {
            entries: vec![(144, 1.0)],
            residual_norm: 0.0,
            iterations: 1,
        };
        assert!(reconstruct(&d, &bad).is_err());
    }

    #[test]
    fn residual_norm_matches_recomputed_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dicts = [dct12(), random_dictionary(&mut rng, 144, 200)];
        for d in &dicts {
            for _ in 0..50 {
                let y: Vec<f64> = (0..144).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let rule = StoppingRule::new(rng.gen_range(0.0..4.0), rng.gen_range(1..=36));
                let code = omp_encode(d, &y, &rule).unwrap();
                let approx = reconstruct(d, &code).unwrap();
                let r: f64 = y.iter().zip(&approx).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                assert!((r - code.residual_norm).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn incremental_solve_matches_scratch_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = random_dictionary(&mut rng, 32, 64);
        for _ in 0..20 {
            let y: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut p = Pursuit::new(&d, &y).unwrap();
            for _ in 0..12 {
                if p.step().is_none() {
                    break;
                }
                let scratch = scratch_least_squares(&d, p.selected(), &y);
                for (a, b) in p.coefficients().iter().zip(&scratch) {
                    assert!((a - b).abs() < 1e-9);
                }
                for &j in p.selected() {
                    assert!(dot(p.residual(), d.atom(j)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn excluded_atoms_never_selected() {
        let d = dct12();
        // pure DC signal: only the excluded atom correlates
        let code = omp_encode(&d, &[5.0; 144], &StoppingRule::new(0.0, 36)).unwrap();
        assert!(code.entries.is_empty());
        assert!((code.residual_norm - 60.0).abs() < 1e-9);
    }

    #[test]
    fn ties_prefer_lowest_index() {
        let cols = vec![
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ];
        let d = Dictionary::from_columns(3, &cols).unwrap();
        let code = omp_encode(&d, &[2.0, 2.0, 0.5], &StoppingRule::new(0.0, 2)).unwrap();
        let order: Vec<usize> = code.entries.iter().map(|e| e.0).collect();
        assert_eq!(order, vec![1, 2]);
    }
}
