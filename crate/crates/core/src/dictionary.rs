//! Separable 2D patch dictionaries built from 1D bases.

use std::collections::BTreeSet;
use std::io::Write;

use crate::basis::{dot, BasisKind, BasisMatrix};
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Column-oriented dictionary of unit-norm atoms.
///
/// Atoms are stored contiguously (column-major) together with their Gram
/// matrix, which OMP uses to update correlations without touching the atoms.
#[derive(Debug, Clone)]
pub struct Dictionary {
    atom_dim: usize,
    num_atoms: usize,
    atoms: Vec<f64>,
    gram: Vec<f64>,
    kind: Option<BasisKind>,
    patch_size: Option<usize>,
    excluded: BTreeSet<usize>,
}

impl Dictionary {
    /// Separable dictionary: atom `n * s + m` is the row-major vectorization of
    /// `row_basis[n]^T * col_basis[m]`.
    pub fn separable(row_basis: &BasisMatrix, col_basis: &BasisMatrix) -> Result<Self> {
        let s = row_basis.size();
        if col_basis.size() != s {
            return Err(Error::invalid(format!(
                "row and column bases differ in size ({} vs {})",
                s,
                col_basis.size()
            )));
        }
        let d = s * s;
        let mut atoms = Vec::with_capacity(d * d);
        for n in 0..s {
            for m in 0..s {
                let rn = row_basis.row(n);
                let cm = col_basis.row(m);
                for &a in rn {
                    atoms.extend(cm.iter().map(|&b| a * b));
                }
            }
        }
        let mut dict = Self::from_parts(d, d, atoms, Some(row_basis.kind()), Some(s));
        dict.excluded.insert(0);
        Ok(dict)
    }

    /// Dictionary from explicit columns (one `Vec` per atom). Columns are
    /// scaled to unit norm; nothing is excluded.
    pub fn from_columns(atom_dim: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if atom_dim == 0 || columns.is_empty() {
            return Err(Error::invalid("dictionary needs a positive dimension and at least one atom"));
        }
        let mut atoms = Vec::with_capacity(atom_dim * columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != atom_dim {
                return Err(Error::invalid(format!(
                    "atom {j} has dimension {}, expected {atom_dim}",
                    col.len()
                )));
            }
            let norm = dot(col, col).sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::invalid(format!("atom {j} is zero or non-finite")));
            }
            atoms.extend(col.iter().map(|v| v / norm));
        }
        Ok(Self::from_parts(atom_dim, columns.len(), atoms, None, None))
    }

    fn from_parts(
        atom_dim: usize,
        num_atoms: usize,
        atoms: Vec<f64>,
        kind: Option<BasisKind>,
        patch_size: Option<usize>,
    ) -> Self {
        let mut gram = vec![0.0; num_atoms * num_atoms];
        for i in 0..num_atoms {
            let ai = &atoms[i * atom_dim..(i + 1) * atom_dim];
            for j in i..num_atoms {
                let g = dot(ai, &atoms[j * atom_dim..(j + 1) * atom_dim]);
                gram[i * num_atoms + j] = g;
                gram[j * num_atoms + i] = g;
            }
        }
        Dictionary {
            atom_dim,
            num_atoms,
            atoms,
            gram,
            kind,
            patch_size,
            excluded: BTreeSet::new(),
        }
    }

    /// Same atoms, different exclusion set.
    pub fn with_excluded(mut self, excluded: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = excluded.into_iter().collect();
        if let Some(&bad) = set.iter().find(|&&i| i >= self.num_atoms) {
            return Err(Error::invalid(format!(
                "excluded atom {bad} out of range (dictionary has {} atoms)",
                self.num_atoms
            )));
        }
        self.excluded = set;
        Ok(self)
    }

    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    pub fn kind(&self) -> Option<BasisKind> {
        self.kind
    }

    pub fn patch_size(&self) -> Option<usize> {
        self.patch_size
    }

    pub fn excluded(&self) -> &BTreeSet<usize> {
        &self.excluded
    }

    #[inline]
    pub fn is_excluded(&self, index: usize) -> bool {
        self.excluded.contains(&index)
    }

    /// Number of atoms OMP may select.
    pub fn selectable(&self) -> usize {
        self.num_atoms - self.excluded.len()
    }

    #[inline]
    pub fn atom(&self, index: usize) -> &[f64] {
        &self.atoms[index * self.atom_dim..(index + 1) * self.atom_dim]
    }

    /// `<atom_i, atom_j>`.
    #[inline]
    pub fn gram(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.num_atoms + j]
    }

    pub(crate) fn gram_column(&self, j: usize) -> &[f64] {
        &self.gram[j * self.num_atoms..(j + 1) * self.num_atoms]
    }

    /// `D^T v` for a vector of length `atom_dim`.
    pub fn correlate(&self, v: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(self.atom(j), v);
        }
    }

    /// Largest `|<a_i, a_j>|` over distinct atoms.
    pub fn mutual_coherence(&self) -> Result<f64> {
        mutual_coherence(self)
    }

    /// Largest `|G - I|` entry of the Gram matrix.
    pub fn gram_identity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.num_atoms {
            for j in 0..self.num_atoms {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.gram(i, j) - target).abs());
            }
        }
        worst
    }

    /// One atom per line, comma separated, shortest round-trip precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for j in 0..self.num_atoms {
            let line: Vec<String> = self.atom(j).iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Square separable dictionary for `patch_size x patch_size` patches.
///
/// For Krawtchouk, `p1` parameterizes the row (vertical) direction and `p2`
/// the column direction; any `p` carried inside `kind` is ignored. The DC atom
/// (index 0) is placed in the excluded set.
pub fn build_dictionary(kind: BasisKind, patch_size: usize, p1: f64, p2: f64) -> Result<Dictionary> {
    if patch_size < 2 {
        return Err(Error::invalid(format!(
            "patch size must be at least 2, got {patch_size}"
        )));
    }
    let (rows, cols) = match kind {
        BasisKind::Krawtchouk { .. } => (
            BasisMatrix::generate(BasisKind::krawtchouk(p1)?, patch_size)?,
            BasisMatrix::generate(BasisKind::krawtchouk(p2)?, patch_size)?,
        ),
        other => {
            let b = BasisMatrix::generate(other, patch_size)?;
            (b.clone(), b)
        }
    };
    Dictionary::separable(&rows, &cols)
}

pub fn mutual_coherence(dict: &Dictionary) -> Result<f64> {
    let m = dict.num_atoms();
    if m < 2 {
        return Err(Error::invalid("mutual coherence needs at least two atoms"));
    }
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            worst = worst.max(dict.gram(i, j).abs());
        }
    }
    Ok(worst)
}

/// Tile every atom of a separable dictionary into one image.
///
/// Tile `(n, m)` shows atom `n * s + m`, stretched independently so its
/// minimum maps to 0 and its maximum to 255. Constant tiles are mid-gray (128)
/// and tiles are separated by `gap` white pixels.
pub fn render_atlas(dict: &Dictionary, gap: usize) -> Result<GrayImage> {
    let s = dict
        .patch_size()
        .ok_or_else(|| Error::invalid("atlas rendering needs a separable patch dictionary"))?;
    let side = s * s + (s - 1) * gap;
    let mut img = GrayImage::filled(side, side, 255.0)?;
    for n in 0..s {
        for m in 0..s {
            let atom = dict.atom(n * s + m);
            let lo = atom.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = atom.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let constant = hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1e-300);
            let top = n * (s + gap);
            let left = m * (s + gap);
            for i in 0..s {
                for j in 0..s {
                    let v = if constant {
                        128.0
                    } else {
                        255.0 * (atom[i * s + j] - lo) / (hi - lo)
                    };
                    img.set(top + i, left + j, v);
                }
            }
        }
    }
    Ok(img)
}
