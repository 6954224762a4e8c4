//! Truncated generator matrices for the squeezing families, with hard/soft
//! cutoffs, invariant-subspace views and basic state construction.
//!
//! All generators are stored by their upper bands: the entry at index `j` of
//! band `d` couples `|j>` and `|j+d>`; the lower bands follow by Hermitian
//! conjugation.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymTridiag;

/// Largest dimension for which a dense materialization is allowed.
pub const DENSE_LIMIT: usize = 4096;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cutoff {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// i[(a^dag)^n - a^n], the generalized squeezing generator.
    Standard,
    /// p^n with p = (a^dag - a)/i, built by powering the truncated p matrix.
    MomentumPower,
    /// Hand-built generator coupling |3k> and |3(k+1)> with two-photon
    /// squeezing matrix elements.
    DesignerTrisqueeze,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Standard => "standard",
            Family::MomentumPower => "momentum_power",
            Family::DesignerTrisqueeze => "designer_trisqueeze",
        }
    }
}

/// Squeezing order, truncation size, cutoff kind and generator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub order: usize,
    pub dim: usize,
    pub cutoff: Cutoff,
    pub family: Family,
}

impl GeneratorSpec {
    pub fn new(order: usize, dim: usize, cutoff: Cutoff, family: Family) -> Result<Self> {
        let spec = Self {
            order,
            dim,
            cutoff,
            family,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidSpec("order n must be >= 1".into()));
        }
        if self.dim < 2 * self.order {
            return Err(Error::InvalidSpec(format!(
                "dimension N = {} must be at least 2n = {}",
                self.dim,
                2 * self.order
            )));
        }
        match self.family {
            Family::Standard | Family::DesignerTrisqueeze => {
                if self.dim % self.order != 0 {
                    return Err(Error::InvalidSpec(format!(
                        "dimension N = {} must be a multiple of n = {} for family {}",
                        self.dim,
                        self.order,
                        self.family.name()
                    )));
                }
            }
            Family::MomentumPower => {}
        }
        if self.family == Family::DesignerTrisqueeze && self.order != 3 {
            return Err(Error::InvalidSpec(format!(
                "designer_trisqueeze requires n = 3, got n = {}",
                self.order
            )));
        }
        Ok(())
    }

    /// Number of rungs per invariant subspace (Standard/Designer families).
    pub fn rungs(&self) -> usize {
        self.dim / self.order
    }
}

/// Matrix element coupling |k> and |k+n>: -i sqrt((k+1)(k+2)...(k+n)).
pub fn matrix_element(k: usize, n: usize) -> Complex64 {
    let mut prod = 1.0_f64;
    for j in 1..=n {
        prod *= (k + j) as f64;
    }
    Complex64::new(0.0, -prod.sqrt())
}

/// Soft-cutoff suppression: 1 below k/N = 0.8, then sin(5 pi (N-k) / (2N)).
pub fn suppression_factor(k: usize, dim: usize) -> f64 {
    let nf = dim as f64;
    let kf = k as f64;
    if kf / nf < 0.8 {
        1.0
    } else {
        (5.0 * std::f64::consts::PI * (nf - kf) / (2.0 * nf)).sin()
    }
}

/// Banded Hermitian matrix approximating the squeezing generator.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    spec: GeneratorSpec,
    bands: BTreeMap<usize, Vec<Complex64>>,
    /// Real symmetric tridiagonal image of the truncated p matrix under the
    /// diagonal phase gauge d_k = (-i)^k; present for MomentumPower only.
    /// The generator spectrum follows by raising its eigenvalues to n.
    p_gauge: Option<SymTridiag>,
}

impl GeneratorMatrix {
    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn order(&self) -> usize {
        self.spec.order
    }

    /// Upper band at nonnegative offset `d`, if present.
    pub fn band(&self, d: usize) -> Option<&[Complex64]> {
        self.bands.get(&d).map(|v| v.as_slice())
    }

    pub fn band_offsets(&self) -> impl Iterator<Item = usize> + '_ {
        self.bands.keys().copied()
    }

    pub(crate) fn p_gauge(&self) -> Option<&SymTridiag> {
        self.p_gauge.as_ref()
    }

    /// Dense materialization for small matrices (tests and diagnostics).
    pub fn to_dense(&self) -> Result<Vec<Vec<Complex64>>> {
        let n = self.dim();
        if n > DENSE_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "dense materialization limited to N <= {DENSE_LIMIT}, got {n}"
            )));
        }
        let mut m = vec![vec![Complex64::ZERO; n]; n];
        for (&d, entries) in &self.bands {
            for (j, &h) in entries.iter().enumerate() {
                m[j][j + d] = h;
                if d > 0 {
                    m[j + d][j] = h.conj();
                }
            }
        }
        Ok(m)
    }
}

/// Builds the truncated generator matrix for `spec`.
pub fn build_generator(spec: &GeneratorSpec) -> Result<GeneratorMatrix> {
    spec.validate()?;
    let n = spec.order;
    let dim = spec.dim;
    let soft = spec.cutoff == Cutoff::Soft;
    let mut bands = BTreeMap::new();
    let mut p_gauge = None;
    match spec.family {
        Family::Standard => {
            let mut band = Vec::with_capacity(dim - n);
            for k in 0..dim - n {
                let mut h = matrix_element(k, n);
                if soft {
                    h *= suppression_factor(k + n, dim);
                }
                band.push(h);
            }
            bands.insert(n, band);
        }
        Family::DesignerTrisqueeze => {
            let mut band = vec![Complex64::ZERO; dim - 3];
            for (j, entry) in band.iter_mut().enumerate() {
                if j % 3 == 0 {
                    let k = j / 3;
                    let mag = ((2 * k + 1) as f64 * (2 * k + 2) as f64).sqrt();
                    let mut h = Complex64::new(0.0, -mag);
                    if soft {
                        h *= suppression_factor(j + 3, dim);
                    }
                    *entry = h;
                }
            }
            bands.insert(3, band);
        }
        Family::MomentumPower => {
            // Gauged p is real tridiagonal with off-diagonal -sqrt(k+1); the
            // ungauged band at offset d carries the extra phase (-i)^d.
            let mut off = Vec::with_capacity(dim - 1);
            for k in 0..dim - 1 {
                let mut t = -((k + 1) as f64).sqrt();
                if soft {
                    t *= suppression_factor(k + 1, dim);
                }
                off.push(t);
            }
            let tp = SymTridiag::new(vec![0.0; dim], off);
            let power = banded_power(&tp, n);
            for (d, entries) in power.into_iter().enumerate() {
                if d % 2 != n % 2 {
                    continue;
                }
                let phase = minus_i_pow(d);
                bands.insert(d, entries.into_iter().map(|x| phase * x).collect());
            }
            p_gauge = Some(tp);
        }
    }
    Ok(GeneratorMatrix {
        spec: *spec,
        bands,
        p_gauge,
    })
}

fn minus_i_pow(d: usize) -> Complex64 {
    match d % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Upper bands (offset -> entries) of T^n for a real symmetric tridiagonal T.
fn banded_power(t: &SymTridiag, n: usize) -> Vec<Vec<f64>> {
    let dim = t.dim();
    // bands[d][i] = entry (i, i+d); symmetric closure implied
    let mut bands: Vec<Vec<f64>> = vec![t.diag().to_vec(), t.offdiag().to_vec()];
    let get = |bands: &[Vec<f64>], i: usize, j: usize| -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d < bands.len() && hi < dim {
            bands[d][lo]
        } else {
            0.0
        }
    };
    for _ in 1..n {
        let bw = bands.len(); // new bandwidth is bw + 1 offsets (0..=bw)
        let mut next: Vec<Vec<f64>> = (0..=bw).map(|d| vec![0.0; dim - d]).collect();
        for (d, next_band) in next.iter_mut().enumerate() {
            for (i, out) in next_band.iter_mut().enumerate() {
                let j = i + d;
                // (A T)_{i,j} = A_{i,j-1} t_{j-1} + A_{i,j} diag_j + A_{i,j+1} t_j
                let mut acc = get(&bands, i, j) * t.diag()[j];
                if j > 0 {
                    acc += get(&bands, i, j - 1) * t.offdiag()[j - 1];
                }
                if j + 1 < dim {
                    acc += get(&bands, i, j + 1) * t.offdiag()[j];
                }
                *out = acc;
            }
        }
        bands = next;
    }
    bands
}

/// One residue class mod n of a Standard/Designer generator, reduced to its
/// real symmetric tridiagonal form.
///
/// The full-matrix entries coupling rungs `j` and `j+1` of the class are
/// `-i b_j` with `b_j >= 0`; the diagonal phase gauge `d_j = (-i)^j` maps the
/// class matrix to the real symmetric tridiagonal stored here, with
/// off-diagonals `b_j`.
#[derive(Debug, Clone)]
pub struct SubspaceView {
    residue: usize,
    order: usize,
    tridiag: SymTridiag,
}

impl SubspaceView {
    pub fn residue(&self) -> usize {
        self.residue
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of rungs in the class.
    pub fn rungs(&self) -> usize {
        self.tridiag.dim()
    }

    /// Photon number of rung `j`.
    pub fn photon_index(&self, j: usize) -> usize {
        self.residue + j * self.order
    }

    /// Gauge-reduced real symmetric tridiagonal matrix of the class.
    pub fn matrix(&self) -> &SymTridiag {
        &self.tridiag
    }
}

/// Extracts the invariant subspace of residue `s`.
pub fn subspace_view(gen: &GeneratorMatrix, s: usize) -> Result<SubspaceView> {
    let spec = gen.spec();
    match spec.family {
        Family::Standard | Family::DesignerTrisqueeze => {}
        Family::MomentumPower => {
            return Err(Error::UnsupportedFamily {
                family: "momentum_power",
                reason: "p^n mixes residue classes; no invariant-subspace view exists",
            })
        }
    }
    let n = spec.order;
    if s >= n {
        return Err(Error::InvalidParameter(format!(
            "residue {s} out of range for order {n}"
        )));
    }
    let m = spec.rungs();
    let band = gen.band(n).expect("standard-family band present");
    let mut off = Vec::with_capacity(m - 1);
    for j in 0..m - 1 {
        let entry = band[s + j * n];
        debug_assert!(
            entry.re.abs() <= 1e-12 * entry.norm() && entry.im <= 0.0,
            "standard-family band entries are -i b with b >= 0"
        );
        off.push(-entry.im);
    }
    Ok(SubspaceView {
        residue: s,
        order: n,
        tridiag: SymTridiag::new(vec![0.0; m], off),
    })
}

/// Complex amplitudes over the Fock basis, unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0>: c_0 = 1, all other amplitudes zero.
    pub fn vacuum(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let mut amps = vec![Complex64::ZERO; dim];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// Fock state |k>.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, dim });
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// Builds a state from amplitudes, enforcing unit norm within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let deviation = (norm - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { amps })
    }

    pub(crate) fn from_raw(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amps[k]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Convenience alias for [`StateVector::vacuum`].
pub fn vacuum_state(dim: usize) -> StateVector {
    StateVector::vacuum(dim)
}
