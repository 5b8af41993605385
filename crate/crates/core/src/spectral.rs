//! Self-adjoint models, their integer band decomposition, the unitary group
//! `e^{itD}` and the absolute value `|D|`.
//!
//! Band `n` is the spectral subspace for `(n − 1, n]`. Every model carries an
//! eigenbasis (explicit for Hermitian input, the standard basis otherwise), and
//! the band frames are groups of eigenvectors, so each `d_n` is diagonal in its
//! own frame.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{
    from_spectrum, hermitian_eigen, max_abs, real_diagonal, CMatrix, CVector, C64,
};

/// Eigenvalues within this distance of an integer are snapped onto it before
/// the `(n − 1, n]` assignment.
pub const BAND_SNAP_TOLERANCE: f64 = 1e-12;

/// Relative entrywise Hermiticity tolerance for dense input.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Hermitian,
    Diagonal,
    Circle,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Hermitian => "hermitian",
            ModelKind::Diagonal => "diagonal",
            ModelKind::Circle => "circle",
        }
    }
}

#[derive(Clone, Debug)]
enum ModelData {
    Hermitian { matrix: CMatrix, eigenvalues: Vec<f64>, eigenvectors: CMatrix },
    Diagonal { eigenvalues: Vec<f64> },
    Circle { bandlimit: usize },
}

/// A self-adjoint operator `D`.
///
/// `section` is set when the model is the finite section `|n| ≤ L` of an
/// operator on the circle; analyses on such models sweep windows instead of
/// trusting the finite-dimensional commutator outright.
#[derive(Clone, Debug)]
pub struct SelfAdjointModel {
    data: ModelData,
    section: Option<usize>,
}

impl SelfAdjointModel {
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::validation(format!(
                "Hermitian model must be square, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::validation("model dimension must be positive"));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("matrix has non-finite entries"));
        }
        let scale = max_abs(&matrix);
        let skew = max_abs(&(&matrix - matrix.adjoint()));
        if skew > HERMITIAN_TOLERANCE * scale {
            return Err(Error::validation(format!(
                "matrix is not Hermitian: max |A − A*| = {skew:.3e}"
            )));
        }
        let matrix = (&matrix + matrix.adjoint()) * C64::from(0.5);
        let (eigenvalues, eigenvectors) = hermitian_eigen(&matrix)?;
        Ok(Self { data: ModelData::Hermitian { matrix, eigenvalues, eigenvectors }, section: None })
    }

    pub fn diagonal(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::validation("model dimension must be positive"));
        }
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("eigenvalues must be finite"));
        }
        Ok(Self { data: ModelData::Diagonal { eigenvalues }, section: None })
    }

    /// `D = (1/i) d/dθ` on span{u_{−L}, …, u_L}, `u_n(θ) = e^{inθ}`.
    pub fn circle(bandlimit: usize) -> Result<Self> {
        if bandlimit == 0 {
            return Err(Error::validation("circle bandlimit must be at least 1"));
        }
        Ok(Self { data: ModelData::Circle { bandlimit }, section: Some(bandlimit) })
    }

    pub fn kind(&self) -> ModelKind {
        match self.data {
            ModelData::Hermitian { .. } => ModelKind::Hermitian,
            ModelData::Diagonal { .. } => ModelKind::Diagonal,
            ModelData::Circle { .. } => ModelKind::Circle,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.data {
            ModelData::Hermitian { matrix, .. } => matrix.nrows(),
            ModelData::Diagonal { eigenvalues } => eigenvalues.len(),
            ModelData::Circle { bandlimit } => 2 * bandlimit + 1,
        }
    }

    /// Bandlimit of the circle section this model lives on, if any.
    pub fn bandlimit(&self) -> Option<usize> {
        self.section
    }

    pub fn is_truncated(&self) -> bool {
        self.section.is_some()
    }

    /// Eigenvalues, aligned with the columns of [`eigenbasis`](Self::eigenbasis).
    ///
    /// Circle models list `−L, …, L`, matching ambient index `j ↔ mode j − L`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match &self.data {
            ModelData::Hermitian { eigenvalues, .. } => eigenvalues.clone(),
            ModelData::Diagonal { eigenvalues } => eigenvalues.clone(),
            ModelData::Circle { bandlimit } => {
                let l = *bandlimit as i64;
                (-l..=l).map(|n| n as f64).collect()
            }
        }
    }

    /// Explicit eigenvectors; `None` means the standard basis.
    pub fn eigenbasis(&self) -> Option<&CMatrix> {
        match &self.data {
            ModelData::Hermitian { eigenvectors, .. } => Some(eigenvectors),
            _ => None,
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match &self.data {
            ModelData::Hermitian { matrix, .. } => matrix.clone(),
            _ => real_diagonal(&self.eigenvalues()),
        }
    }

    /// ‖D‖ (largest |eigenvalue|).
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        match &self.data {
            ModelData::Hermitian { matrix, .. } => matrix * x,
            _ => {
                let values = self.eigenvalues();
                CVector::from_iterator(x.len(), x.iter().zip(&values).map(|(z, &v)| z * v))
            }
        }
    }

    /// Coordinates of an ambient vector in the eigenbasis.
    pub fn to_eigen(&self, x: &CVector) -> CVector {
        match self.eigenbasis() {
            Some(v) => v.adjoint() * x,
            None => x.clone(),
        }
    }

    pub fn from_eigen(&self, y: &CVector) -> CVector {
        match self.eigenbasis() {
            Some(v) => v * y,
            None => y.clone(),
        }
    }

    /// `V* a V`.
    pub fn matrix_to_eigen(&self, a: &CMatrix) -> CMatrix {
        match self.eigenbasis() {
            Some(v) => v.adjoint() * a * v,
            None => a.clone(),
        }
    }

    /// `V m V*`.
    pub fn matrix_from_eigen(&self, m: &CMatrix) -> CMatrix {
        match self.eigenbasis() {
            Some(v) => v * m * v.adjoint(),
            None => m.clone(),
        }
    }

    pub fn check_operator_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dim });
        }
        Ok(())
    }
}

/// Band index of an eigenvalue: `⌈λ⌉` after snapping near-integers.
pub fn band_of(lambda: f64) -> i64 {
    let r = lambda.round();
    let snapped = if (lambda - r).abs() <= BAND_SNAP_TOLERANCE { r } else { lambda };
    snapped.ceil() as i64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Band {
    pub index: i64,
    /// First column of this band in band-basis order.
    pub offset: usize,
    pub dim: usize,
}

impl Band {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.dim
    }
}

/// The family of spectral subspaces `e_n H` with their frames and blocks `d_n`.
///
/// Frames are stored as one orthonormal "band basis": the eigenvectors ordered
/// by band, so that each band occupies a contiguous run of columns.
#[derive(Clone, Debug)]
pub struct BandDecomposition {
    dim: usize,
    bands: BTreeMap<i64, Band>,
    /// Band-basis column `j` is eigenvector `positions[j]` of the model.
    positions: Vec<usize>,
    eigenvalues: Vec<f64>,
    /// Ambient eigenvectors in band-basis order; `None` for the permuted standard basis.
    basis: Option<CMatrix>,
    truncated: bool,
}

pub fn band_decompose(model: &SelfAdjointModel) -> BandDecomposition {
    let values = model.eigenvalues();
    let mut positions: Vec<usize> = (0..values.len()).collect();
    positions.sort_by(|&a, &b| {
        band_of(values[a]).cmp(&band_of(values[b])).then(values[a].total_cmp(&values[b]))
    });

    let eigenvalues: Vec<f64> = positions.iter().map(|&p| values[p]).collect();
    let mut bands = BTreeMap::new();
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let n = band_of(lambda);
        bands.entry(n).or_insert(Band { index: n, offset: j, dim: 0 }).dim += 1;
    }
    let basis = model
        .eigenbasis()
        .map(|v| CMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, positions[j])]));

    BandDecomposition {
        dim: values.len(),
        bands,
        positions,
        eigenvalues,
        basis,
        truncated: model.is_truncated(),
    }
}

impl BandDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bands(&self) -> impl Iterator<Item = &Band> {
        self.bands.values()
    }

    pub fn band(&self, n: i64) -> Option<&Band> {
        self.bands.get(&n)
    }

    pub fn band_indices(&self) -> Vec<i64> {
        self.bands.keys().copied().collect()
    }

    pub fn min_band(&self) -> i64 {
        *self.bands.keys().next().expect("decomposition has at least one band")
    }

    pub fn max_band(&self) -> i64 {
        *self.bands.keys().next_back().expect("decomposition has at least one band")
    }

    /// Eigenvalues in band-basis order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Band of every band-basis vector.
    pub fn band_labels(&self) -> Vec<i64> {
        self.eigenvalues.iter().map(|&l| band_of(l)).collect()
    }

    /// Ambient index of the band-basis column when the basis is a permuted
    /// standard basis.
    pub fn standard_position(&self, j: usize) -> Option<usize> {
        self.basis.is_none().then(|| self.positions[j])
    }

    /// Orthonormal frame for `e_n H` as ambient columns.
    pub fn frame(&self, n: i64) -> Option<CMatrix> {
        let band = self.bands.get(&n)?;
        Some(self.frame_columns(band.range()))
    }

    fn frame_columns(&self, cols: Range<usize>) -> CMatrix {
        match &self.basis {
            Some(v) => v.columns(cols.start, cols.len()).into_owned(),
            None => {
                let mut f = CMatrix::zeros(self.dim, cols.len());
                for (k, j) in cols.enumerate() {
                    f[(self.positions[j], k)] = C64::from(1.0);
                }
                f
            }
        }
    }

    /// The block `d_n = D|e_n H` in its frame.
    pub fn dblock(&self, n: i64) -> Option<CMatrix> {
        let band = self.bands.get(&n)?;
        Some(real_diagonal(&self.eigenvalues[band.range()]))
    }

    /// `F* x`: ambient vector to band-basis coordinates.
    pub fn to_band(&self, x: &CVector) -> CVector {
        match &self.basis {
            Some(v) => v.adjoint() * x,
            None => CVector::from_iterator(self.dim, self.positions.iter().map(|&p| x[p])),
        }
    }

    /// `F y`.
    pub fn from_band(&self, y: &CVector) -> CVector {
        match &self.basis {
            Some(v) => v * y,
            None => {
                let mut x = CVector::zeros(self.dim);
                for (j, &p) in self.positions.iter().enumerate() {
                    x[p] = y[j];
                }
                x
            }
        }
    }

    /// `F* a F`.
    pub fn matrix_to_band(&self, a: &CMatrix) -> CMatrix {
        match &self.basis {
            Some(v) => v.adjoint() * a * v,
            None => CMatrix::from_fn(self.dim, self.dim, |i, j| {
                a[(self.positions[i], self.positions[j])]
            }),
        }
    }

    /// `F m F*`.
    pub fn matrix_from_band(&self, m: &CMatrix) -> CMatrix {
        self.rows_cols_from_band(m, 0..self.dim)
    }

    /// Ambient operator `F_W m F_W*` for a square block `m` indexed by band-basis columns `cols`.
    pub(crate) fn rows_cols_from_band(&self, m: &CMatrix, cols: Range<usize>) -> CMatrix {
        match &self.basis {
            Some(_) => {
                let f = self.frame_columns(cols);
                &f * m * f.adjoint()
            }
            None => {
                let mut out = CMatrix::zeros(self.dim, self.dim);
                for (i, bi) in cols.clone().enumerate() {
                    for (j, bj) in cols.clone().enumerate() {
                        out[(self.positions[bi], self.positions[bj])] = m[(i, j)];
                    }
                }
                out
            }
        }
    }

    /// Smallest window `n ≥ 1` whose range `(−n, n]` holds every band.
    pub fn full_window(&self) -> i64 {
        window_covering(self.min_band()).max(window_covering(self.max_band()))
    }

    /// The compression `E_n = Σ_{j=1−n}^{n} e_j`.
    pub fn window(&self, n: i64) -> Result<WindowProjection> {
        if n < 1 {
            return Err(Error::invalid(format!("window index must be ≥ 1, got {n}")));
        }
        let (lo, hi) = (1 - n, n);
        let inside: Vec<&Band> = self.bands.range(lo..=hi).map(|(_, b)| b).collect();
        let range = match (inside.first(), inside.last()) {
            (Some(first), Some(last)) => first.offset..last.offset + last.dim,
            _ => 0..0,
        };
        let leaked = self.truncated && (lo < self.min_band() || hi > self.max_band());
        Ok(WindowProjection {
            n,
            bands: inside.iter().map(|b| b.index).collect(),
            range,
            leaked,
        })
    }
}

/// Smallest window index whose range `(−n, n]` contains band `b`.
pub fn window_covering(b: i64) -> i64 {
    b.max(1 - b).max(1)
}

/// `E_n` as a contiguous run of band-basis columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowProjection {
    pub n: i64,
    pub bands: Vec<i64>,
    pub range: Range<usize>,
    /// The window asked for bands past the edge of a truncated model.
    pub leaked: bool,
}

impl WindowProjection {
    pub fn dim(&self) -> usize {
        self.range.len()
    }

    /// Ambient matrix of the orthogonal projection `E_n`.
    pub fn projector(&self, bd: &BandDecomposition) -> CMatrix {
        bd.rows_cols_from_band(&CMatrix::identity(self.dim(), self.dim()), self.range.clone())
    }

    /// Ambient frame for `E_n H`.
    pub fn frame(&self, bd: &BandDecomposition) -> CMatrix {
        bd.frame_columns(self.range.clone())
    }
}

/// `e^{itD} = V diag(e^{itλ}) V*`.
#[derive(Clone, Debug)]
pub struct Unitary {
    phases: Vec<C64>,
    basis: Option<CMatrix>,
}

pub fn unitary_group(model: &SelfAdjointModel, t: f64) -> Unitary {
    let phases = model.eigenvalues().iter().map(|&l| C64::from_polar(1.0, t * l)).collect();
    Unitary { phases, basis: model.eigenbasis().cloned() }
}

impl Unitary {
    /// Diagonal entries in the eigenbasis (the full matrix for circle and diagonal models).
    pub fn phases(&self) -> &[C64] {
        &self.phases
    }

    pub fn is_diagonal(&self) -> bool {
        self.basis.is_none()
    }

    pub fn to_dense(&self) -> CMatrix {
        let diag = CMatrix::from_diagonal(&CVector::from_vec(self.phases.clone()));
        match &self.basis {
            Some(v) => v * diag * v.adjoint(),
            None => diag,
        }
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        let scale = |y: CVector| {
            CVector::from_iterator(y.len(), y.iter().zip(&self.phases).map(|(a, p)| a * p))
        };
        match &self.basis {
            Some(v) => v * scale(v.adjoint() * x),
            None => scale(x.clone()),
        }
    }
}

/// `|D| = (D²)^{1/2}`: same eigenvectors, eigenvalues `|λ|`.
pub fn abs_operator(model: &SelfAdjointModel) -> SelfAdjointModel {
    let data = match &model.data {
        ModelData::Hermitian { eigenvalues, eigenvectors, .. } => {
            let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
            order.sort_by(|&a, &b| eigenvalues[a].abs().total_cmp(&eigenvalues[b].abs()));
            let values: Vec<f64> = order.iter().map(|&j| eigenvalues[j].abs()).collect();
            let vectors = CMatrix::from_fn(eigenvectors.nrows(), eigenvectors.ncols(), |i, j| {
                eigenvectors[(i, order[j])]
            });
            let matrix = from_spectrum(&values, &vectors);
            ModelData::Hermitian { matrix, eigenvalues: values, eigenvectors: vectors }
        }
        ModelData::Diagonal { eigenvalues } => {
            ModelData::Diagonal { eigenvalues: eigenvalues.iter().map(|v| v.abs()).collect() }
        }
        ModelData::Circle { .. } => {
            ModelData::Diagonal { eigenvalues: model.eigenvalues().iter().map(|v| v.abs()).collect() }
        }
    };
    SelfAdjointModel { data, section: model.section }
}
