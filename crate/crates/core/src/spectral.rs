//! Eigenanalysis of the vacuum-containing rung ladder: spectrum, vacuum
//! overlaps, the dominant gap, and eigenstate photon statistics.

use crate::error::{Error, Result};
use crate::fockspace::SubspaceView;
use crate::linalg::TridiagEigen;

/// Eigendecomposition of one residue-class ladder together with the squared
/// rung-0 component of every eigenvector (the vacuum overlap when the
/// residue is 0).
#[derive(Debug, Clone)]
pub struct SpectralData {
    residue: usize,
    order: usize,
    eigen: TridiagEigen,
    vacuum_overlap_probs: Vec<f64>,
}

impl SpectralData {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigen.values()
    }

    /// Squared first components, aligned with [`Self::eigenvalues`].
    pub fn vacuum_overlap_probs(&self) -> &[f64] {
        &self.vacuum_overlap_probs
    }

    /// Eigenvector over the subspace rungs (gauged real form).
    pub fn eigenvector(&self, index: usize) -> Result<&[f64]> {
        self.check_index(index)?;
        Ok(self.eigen.vector(index))
    }

    /// Photon number of rung `j`.
    pub fn photon_index(&self, j: usize) -> usize {
        self.residue + j * self.order
    }

    pub fn rungs(&self) -> usize {
        self.eigen.dim()
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.eigen.dim() {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.eigen.dim(),
            });
        }
        Ok(())
    }
}

/// Diagonalizes the (gauge-reduced real symmetric) ladder of a residue class.
pub fn eigensystem(view: &SubspaceView) -> Result<SpectralData> {
    let eigen = view.matrix().eigh()?;
    let vacuum_overlap_probs = eigen.first_components().iter().map(|v| v * v).collect();
    Ok(SpectralData {
        residue: view.residue(),
        order: view.order(),
        eigen,
        vacuum_overlap_probs,
    })
}

/// The `top` largest vacuum-overlap probabilities with their eigenvalues,
/// descending by probability; ties break toward the smaller eigenvalue.
pub fn vacuum_overlap_ranking(data: &SpectralData, top: usize) -> Result<Vec<(f64, f64)>> {
    if top == 0 {
        return Err(Error::InvalidParameter("ranking needs top >= 1".into()));
    }
    let mut order: Vec<usize> = (0..data.rungs()).collect();
    order.sort_by(|&a, &b| {
        data.vacuum_overlap_probs[b]
            .partial_cmp(&data.vacuum_overlap_probs[a])
            .unwrap()
            .then(
                data.eigenvalues()[a]
                    .partial_cmp(&data.eigenvalues()[b])
                    .unwrap(),
            )
    });
    Ok(order
        .into_iter()
        .take(top)
        .map(|i| (data.eigenvalues()[i], data.vacuum_overlap_probs[i]))
        .collect())
}

/// Indices of the two highest-overlap eigenstates, errors if a third state
/// ties the second overlap with a different implied gap.
pub fn top_pair_indices(data: &SpectralData) -> Result<(usize, usize)> {
    if data.rungs() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: data.rungs(),
        });
    }
    let mut order: Vec<usize> = (0..data.rungs()).collect();
    order.sort_by(|&a, &b| {
        data.vacuum_overlap_probs[b]
            .partial_cmp(&data.vacuum_overlap_probs[a])
            .unwrap()
            .then(
                data.eigenvalues()[a]
                    .partial_cmp(&data.eigenvalues()[b])
                    .unwrap(),
            )
    });
    let (a, b) = (order[0], order[1]);
    if data.vacuum_overlap_probs[b] == 0.0 {
        return Err(Error::DegenerateRanking);
    }
    if data.rungs() > 2 {
        let c = order[2];
        let tie = (data.vacuum_overlap_probs[b] - data.vacuum_overlap_probs[c]).abs()
            <= 1e-9 * data.vacuum_overlap_probs[b];
        if tie {
            let lam_max = data
                .eigenvalues()
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            let gap_ab = (data.eigenvalues()[a] - data.eigenvalues()[b]).abs();
            let gap_ac = (data.eigenvalues()[a] - data.eigenvalues()[c]).abs();
            if (gap_ab - gap_ac).abs() > 1e-9 * lam_max {
                return Err(Error::DegenerateRanking);
            }
        }
    }
    Ok((a, b))
}

/// |lambda_a - lambda_b| for the two highest-overlap eigenstates.
pub fn dominant_gap(data: &SpectralData) -> Result<f64> {
    let (a, b) = top_pair_indices(data)?;
    Ok((data.eigenvalues()[a] - data.eigenvalues()[b]).abs())
}

/// Mean photon number of one eigenstate, using the ladder's photon indices.
pub fn eigenstate_mean_photon(data: &SpectralData, index: usize) -> Result<f64> {
    data.check_index(index)?;
    Ok(data
        .eigen
        .vector(index)
        .iter()
        .enumerate()
        .map(|(j, v)| data.photon_index(j) as f64 * v * v)
        .sum())
}

/// Per-rung probabilities of one eigenstate, mapped to photon numbers.
pub fn eigenstate_distribution(data: &SpectralData, index: usize) -> Result<Vec<(usize, f64)>> {
    data.check_index(index)?;
    Ok(data
        .eigen
        .vector(index)
        .iter()
        .enumerate()
        .map(|(j, v)| (data.photon_index(j), v * v))
        .collect())
}

/// Two-eigenstate sinusoid prediction over an observed oscillation height:
/// twice the top-pair mean photon number divided by `observed_max`.
pub fn amplitude_fraction(data: &SpectralData, observed_max: f64) -> Result<f64> {
    if !(observed_max > 0.0) {
        return Err(Error::InvalidParameter(
            "observed_max must be positive".into(),
        ));
    }
    let (a, b) = top_pair_indices(data)?;
    let pair_mean =
        0.5 * (eigenstate_mean_photon(data, a)? + eigenstate_mean_photon(data, b)?);
    Ok(2.0 * pair_mean / observed_max)
}
