//! The space of band-indexed block matrices `y = (y_{rc})`, `y_{rc}: e_c H → e_r H`.
//!
//! A [`BlockMatrix`] stores all of its blocks in one dense array laid out in the
//! band basis of its [`BandDecomposition`]: block `(r, c)` is the sub-array at
//! the row run of band `r` and the column run of band `c`. Circle models have
//! 1×1 blocks, so the array is simply the scalar table `y_{rc}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::spectral::{window_covering, BandDecomposition, SelfAdjointModel, WindowProjection};

#[derive(Clone, Debug)]
pub struct BlockMatrix {
    bd: Arc<BandDecomposition>,
    data: CMatrix,
    /// Declared band window `(lo, hi)`; blocks outside it are zero.
    support: (i64, i64),
}

impl BlockMatrix {
    fn new(bd: Arc<BandDecomposition>, data: CMatrix) -> Self {
        let support = (bd.min_band(), bd.max_band());
        Self { bd, data, support }
    }

    pub fn decomposition(&self) -> &Arc<BandDecomposition> {
        &self.bd
    }

    /// All blocks as one matrix in band-basis order.
    pub fn band_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn support(&self) -> (i64, i64) {
        self.support
    }

    /// Block `y_{rc}`, or `None` if either band is absent.
    pub fn block(&self, r: i64, c: i64) -> Option<CMatrix> {
        let (br, bc) = (self.bd.band(r)?, self.bd.band(c)?);
        Some(self.data.view((br.offset, bc.offset), (br.dim, bc.dim)).into_owned())
    }

    fn check_same(&self, other: &BlockMatrix) -> Result<()> {
        if Arc::ptr_eq(&self.bd, &other.bd) {
            Ok(())
        } else {
            Err(Error::DecompositionMismatch)
        }
    }

    pub fn scale(&self, s: C64) -> BlockMatrix {
        BlockMatrix { bd: self.bd.clone(), data: &self.data * s, support: self.support }
    }

    pub fn add(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        self.check_same(other)?;
        Ok(BlockMatrix {
            bd: self.bd.clone(),
            data: &self.data + &other.data,
            support: (self.support.0.min(other.support.0), self.support.1.max(other.support.1)),
        })
    }

    pub fn sub(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        self.add(&other.scale(C64::from(-1.0)))
    }

    /// Debug dump `{"(r, c)": [[[re, im], …], …]}` of the nonzero blocks.
    pub fn to_debug_json(&self) -> Value {
        let mut out = Map::new();
        for br in self.bd.bands() {
            for bc in self.bd.bands() {
                let block = self.data.view((br.offset, bc.offset), (br.dim, bc.dim));
                if block.iter().all(|z| *z == C64::default()) {
                    continue;
                }
                let rows: Vec<Value> = (0..br.dim)
                    .map(|i| {
                        Value::Array(
                            (0..bc.dim)
                                .map(|j| {
                                    let z = block[(i, j)];
                                    Value::from(vec![z.re, z.im])
                                })
                                .collect(),
                        )
                    })
                    .collect();
                out.insert(format!("({}, {})", br.index, bc.index), Value::Array(rows));
            }
        }
        Value::Object(out)
    }
}

/// `m(a)_{rc} = e_r a|e_c H`.
pub fn embed_operator(a: &CMatrix, bd: &Arc<BandDecomposition>) -> Result<BlockMatrix> {
    if a.nrows() != bd.dim() || a.ncols() != bd.dim() {
        return Err(Error::DimensionMismatch { expected: bd.dim(), found: a.nrows().max(a.ncols()) });
    }
    Ok(BlockMatrix::new(bd.clone(), bd.matrix_to_band(a)))
}

/// `m(D)`: block diagonal with the `d_n`.
pub fn embed_d(bd: &Arc<BandDecomposition>) -> BlockMatrix {
    let mut data = CMatrix::zeros(bd.dim(), bd.dim());
    for band in bd.bands() {
        let d = bd.dblock(band.index).expect("band exists");
        data.view_mut((band.offset, band.offset), (band.dim, band.dim)).copy_from(&d);
    }
    BlockMatrix::new(bd.clone(), data)
}

/// `[m(D), y]_{rc} = d_r y_{rc} − y_{rc} d_c`.
pub fn commutator_with_d(y: &BlockMatrix) -> BlockMatrix {
    // Each d_n is diagonal in its eigenframe, so the block rule acts entrywise.
    let lambda = y.bd.eigenvalues();
    let data = CMatrix::from_fn(y.data.nrows(), y.data.ncols(), |i, j| {
        y.data[(i, j)] * (lambda[i] - lambda[j])
    });
    BlockMatrix { bd: y.bd.clone(), data, support: y.support }
}

/// `(y*)_{rc} = (y_{cr})*`.
pub fn adjoint(y: &BlockMatrix) -> BlockMatrix {
    BlockMatrix { bd: y.bd.clone(), data: y.data.adjoint(), support: y.support }
}

/// Block product `(yz)_{rc} = Σ_k y_{rk} z_{kc}`; finite supports make every sum finite.
pub fn multiply(y: &BlockMatrix, z: &BlockMatrix) -> Result<BlockMatrix> {
    y.check_same(z)?;
    Ok(BlockMatrix {
        bd: y.bd.clone(),
        data: &y.data * &z.data,
        support: (y.support.0.min(z.support.0), y.support.1.max(z.support.1)),
    })
}

/// `Σ_{r,c} F_r y_{rc} F_c*` as an ambient operator.
pub fn reassemble(y: &BlockMatrix) -> CMatrix {
    y.bd.matrix_from_band(&y.data)
}

/// Generic commutator of two block matrices.
pub fn commutator(y: &BlockMatrix, z: &BlockMatrix) -> Result<BlockMatrix> {
    multiply(y, z)?.sub(&multiply(z, y)?)
}

/// `π_n(y) = E_n y E_n`, in band-basis coordinates of `E_n H`.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub window: WindowProjection,
    pub matrix: CMatrix,
}

impl Truncation {
    /// The compression as an operator on the whole ambient space.
    pub fn to_ambient(&self, bd: &BandDecomposition) -> CMatrix {
        bd.rows_cols_from_band(&self.matrix, self.window.range.clone())
    }
}

pub fn truncate(y: &BlockMatrix, n: i64) -> Result<Truncation> {
    let window = y.bd.window(n)?;
    let r = window.range.clone();
    let matrix = y.data.view((r.start, r.start), (r.len(), r.len())).into_owned();
    Ok(Truncation { window, matrix })
}

/// A vector of the core `E`: finitely many band components in frame coordinates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoreVector {
    pub components: BTreeMap<i64, CVector>,
}

impl CoreVector {
    /// Splits an ambient vector into band components, dropping exactly-zero bands.
    pub fn from_ambient(bd: &BandDecomposition, x: &CVector) -> Result<Self> {
        if x.len() != bd.dim() {
            return Err(Error::DimensionMismatch { expected: bd.dim(), found: x.len() });
        }
        let coords = bd.to_band(x);
        let mut components = BTreeMap::new();
        for band in bd.bands() {
            let part = coords.rows(band.offset, band.dim).into_owned();
            if part.iter().any(|z| *z != C64::default()) {
                components.insert(band.index, part);
            }
        }
        Ok(Self { components })
    }

    pub fn to_ambient(&self, bd: &BandDecomposition) -> Result<CVector> {
        Ok(bd.from_band(&self.band_coordinates(bd, 0..bd.dim())?))
    }

    /// Smallest `m` with the support inside `(−m, m]`.
    pub fn support_window(&self) -> i64 {
        self.components.keys().map(|&b| window_covering(b)).max().unwrap_or(1)
    }

    fn band_coordinates(&self, bd: &BandDecomposition, range: std::ops::Range<usize>) -> Result<CVector> {
        let mut out = CVector::zeros(range.len());
        for (&n, part) in &self.components {
            let band = bd
                .band(n)
                .ok_or_else(|| Error::invalid(format!("vector has support in band {n}, which the model lacks")))?;
            if part.len() != band.dim {
                return Err(Error::DimensionMismatch { expected: band.dim, found: part.len() });
            }
            if band.offset < range.start || band.offset + band.dim > range.end {
                return Err(Error::invalid(format!("band {n} lies outside the window")));
            }
            out.rows_mut(band.offset - range.start, band.dim).copy_from(part);
        }
        Ok(out)
    }
}

/// Value of the form `S(y)(ξ, η)` and the window where it became constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormValue {
    pub value: C64,
    pub stabilized_at: i64,
}

/// `S(y)(ξ, η) = ⟨π_m(y) ξ, η⟩` at the smallest window `m` holding both supports.
pub fn form_eval(y: &BlockMatrix, xi: &CoreVector, eta: &CoreVector) -> Result<FormValue> {
    let m = xi.support_window().max(eta.support_window());
    Ok(FormValue { value: form_eval_at(y, xi, eta, m)?, stabilized_at: m })
}

/// `⟨π_n(y) ξ, η⟩` at an explicit window `n`.
pub fn form_eval_at(y: &BlockMatrix, xi: &CoreVector, eta: &CoreVector, n: i64) -> Result<C64> {
    let t = truncate(y, n)?;
    let range = t.window.range.clone();
    let x = xi.band_coordinates(&y.bd, range.clone())?;
    let e = eta.band_coordinates(&y.bd, range)?;
    Ok((e.adjoint() * &t.matrix * x)[(0, 0)])
}

/// `‖Dξ − D E_n ξ‖ + ‖ξ − E_n ξ‖`.
pub fn core_defect(model: &SelfAdjointModel, bd: &BandDecomposition, x: &CVector, n: i64) -> Result<f64> {
    model.check_operator_dim(x.len())?;
    let window = bd.window(n)?;
    let coords = bd.to_band(x);
    let lambda = bd.eigenvalues();
    let (mut tail, mut d_tail) = (0.0, 0.0);
    for (j, z) in coords.iter().enumerate() {
        if !window.range.contains(&j) {
            tail += z.norm_sqr();
            d_tail += (z * lambda[j]).norm_sqr();
        }
    }
    Ok(d_tail.sqrt() + tail.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, real_diagonal, spectral_norm_dense};
    use crate::spectral::band_decompose;

    fn diag_bd() -> Arc<BandDecomposition> {
        Arc::new(band_decompose(&SelfAdjointModel::diagonal(vec![0.5, 0.7, 1.2]).unwrap()))
    }

    #[test]
    fn identity_embeds_block_diagonal() {
        let bd = diag_bd();
        let m = embed_operator(&CMatrix::identity(3, 3), &bd).unwrap();
        assert_eq!(m.block(1, 1).unwrap(), CMatrix::identity(2, 2));
        assert_eq!(m.block(2, 2).unwrap(), CMatrix::identity(1, 1));
        assert_eq!(m.block(1, 2).unwrap(), CMatrix::zeros(2, 1));
    }

    #[test]
    fn embedded_d_holds_band_blocks() {
        let bd = diag_bd();
        let md = embed_d(&bd);
        assert_eq!(md.block(1, 1).unwrap(), real_diagonal(&[0.5, 0.7]));
        assert_eq!(md.block(2, 2).unwrap(), real_diagonal(&[1.2]));
        assert_eq!(reassemble(&md), real_diagonal(&[0.5, 0.7, 1.2]));
        assert!(max_abs(commutator_with_d(&md).band_matrix()) == 0.0);
    }

    #[test]
    fn mismatched_decompositions_are_rejected() {
        let (a, b) = (diag_bd(), diag_bd());
        let x = embed_d(&a);
        let y = embed_d(&b);
        assert!(matches!(multiply(&x, &y), Err(Error::DecompositionMismatch)));
        assert!(embed_operator(&CMatrix::identity(2, 2), &a).is_err());
    }

    #[test]
    fn identity_form_is_inner_product() {
        let bd = diag_bd();
        let id = embed_operator(&CMatrix::identity(3, 3), &bd).unwrap();
        let xi = CoreVector::from_ambient(&bd, &CVector::from_vec(vec![C64::new(1.0, 1.0), C64::from(2.0), C64::from(0.0)])).unwrap();
        let eta = CoreVector::from_ambient(&bd, &CVector::from_vec(vec![C64::from(1.0), C64::new(0.0, 1.0), C64::from(3.0)])).unwrap();
        let fv = form_eval(&id, &xi, &eta).unwrap();
        // ⟨ξ, η⟩ = (1+i)·1 + 2·(−i)
        assert!((fv.value - C64::new(1.0, -1.0)).norm() < 1e-15);
        assert_eq!(fv.stabilized_at, 2);
    }

    #[test]
    fn circle_truncation_window_is_one_minus_n_to_n() {
        let bd = Arc::new(band_decompose(&SelfAdjointModel::circle(5).unwrap()));
        let a = CMatrix::from_fn(11, 11, |r, c| C64::new(r as f64, c as f64));
        let y = embed_operator(&a, &bd).unwrap();
        let t = truncate(&y, 2).unwrap();
        assert_eq!(t.window.bands, vec![-1, 0, 1, 2]);
        // ambient index j ↔ mode j − 5
        assert_eq!(t.matrix[(0, 0)], a[(4, 4)]);
        assert_eq!(t.matrix[(3, 0)], a[(7, 4)]);
        let amb = t.to_ambient(&bd);
        let e = t.window.projector(&bd);
        assert!(max_abs(&(amb - &e * &a * &e)) == 0.0);
    }

    #[test]
    fn truncation_norms_are_monotone() {
        let bd = Arc::new(band_decompose(&SelfAdjointModel::circle(6).unwrap()));
        let a = CMatrix::from_fn(13, 13, |r, c| C64::new((r * c) as f64 % 5.0 - 2.0, (r + 2 * c) as f64 % 3.0));
        let y = embed_operator(&a, &bd).unwrap();
        let norms: Vec<f64> = (1..=7).map(|n| spectral_norm_dense(&truncate(&y, n).unwrap().matrix)).collect();
        assert!(norms.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{norms:?}");
    }

    #[test]
    fn core_defect_vanishes_once_window_covers_support() {
        let model = SelfAdjointModel::circle(4).unwrap();
        let bd = band_decompose(&model);
        let x = CVector::from_fn(9, |j, _| C64::from(1.0 + j as f64));
        let defects: Vec<f64> = (1..=5).map(|n| core_defect(&model, &bd, &x, n).unwrap()).collect();
        assert!(defects.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(defects[4], 0.0);
        assert!(defects[3] > 0.0); // window 4 misses mode −4
    }

    #[test]
    fn debug_json_lists_nonzero_blocks() {
        let bd = diag_bd();
        let v = embed_d(&bd).to_debug_json();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.len(), 2);
        assert_eq!(obj["(2, 2)"], serde_json::json!([[[1.2, 0.0]]]));
    }
}
