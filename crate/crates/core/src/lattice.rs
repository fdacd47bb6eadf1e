//! Lattice bases over exact rationals: Gram-Schmidt data, LLL reduction,
//! and the norm guarantees a reduced basis must satisfy.
//!
//! The reduction follows the classical exchange algorithm with incremental
//! Gram-Schmidt updates on swaps, so the quadratic-size recomputation is
//! avoided while everything stays exact.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{cmp_frac_power, rat, rat_int, rat_pow, round_ties_to_zero, FracPower, Rat};

/// Square basis of column vectors spanning a full-rank lattice.
/// `vectors[i]` is the i-th basis vector; all have length `vectors.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    vectors: Vec<Vec<Rat>>,
}

impl LatticeBasis {
    /// Linear independence is not checked here; operations that need the
    /// Gram-Schmidt data report [`Error::LinearDependence`] when they hit a
    /// vanishing orthogonal component.
    pub fn new(vectors: Vec<Vec<Rat>>) -> Result<Self> {
        let dim = vectors.len();
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "basis must contain at least one vector".into(),
            ));
        }
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidParameter(
                "basis vectors must all have length equal to the dimension".into(),
            ));
        }
        Ok(Self { vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Rat>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[Rat] {
        &self.vectors[i]
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(v: &[Rat]) -> Rat {
    dot(v, v)
}

/// Gram-Schmidt data of a basis: orthogonalized vectors `b_i*`, projection
/// coefficients `mu_{i,j} = <b_i, b_j*> / |b_j*|^2` for `j < i`, and the
/// squared norms `|b_i*|^2`. All exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsoData {
    ortho: Vec<Vec<Rat>>,
    mu: Vec<Vec<Rat>>,
    norms_sq: Vec<Rat>,
}

impl GsoData {
    pub fn dim(&self) -> usize {
        self.ortho.len()
    }

    pub fn ortho(&self) -> &[Vec<Rat>] {
        &self.ortho
    }

    /// `mu_{i,j}` for `j < i`.
    pub fn mu(&self, i: usize, j: usize) -> &Rat {
        &self.mu[i][j]
    }

    /// Row `i` holds `mu_{i,0} .. mu_{i,i-1}`.
    pub fn mu_rows(&self) -> &[Vec<Rat>] {
        &self.mu
    }

    pub fn norms_sq(&self) -> &[Rat] {
        &self.norms_sq
    }
}

pub fn gram_schmidt(basis: &LatticeBasis) -> Result<GsoData> {
    let (ortho, mu, norms_sq) = gso_raw(basis.vectors())?;
    Ok(GsoData {
        ortho,
        mu,
        norms_sq,
    })
}

/// Orthogonalized vectors, the `mu` coefficient rows, and `|b_i*|^2`.
type GsoParts = (Vec<Vec<Rat>>, Vec<Vec<Rat>>, Vec<Rat>);

fn gso_raw(vectors: &[Vec<Rat>]) -> Result<GsoParts> {
    let n = vectors.len();
    let mut ortho: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut mu: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut norms: Vec<Rat> = Vec::with_capacity(n);
    for i in 0..n {
        let mut star = vectors[i].clone();
        let mut row = Vec::with_capacity(i);
        for j in 0..i {
            let coeff = dot(&vectors[i], &ortho[j]) / &norms[j];
            for (s, o) in star.iter_mut().zip(&ortho[j]) {
                *s -= &coeff * o;
            }
            row.push(coeff);
        }
        let ns = norm_sq(&star);
        if ns.is_zero() {
            return Err(Error::LinearDependence);
        }
        ortho.push(star);
        mu.push(row);
        norms.push(ns);
    }
    Ok((ortho, mu, norms))
}

/// `|mu_{i,j}| <= 1/2` for all `j < i`.
pub fn is_size_reduced(gso: &GsoData) -> bool {
    let half = rat(1, 2);
    gso.mu.iter().flatten().all(|c| c.abs() <= half)
}

/// Exchange condition for consecutive pairs:
/// `|b_i* + mu_{i,i-1} b_{i-1}*|^2 >= alpha |b_{i-1}*|^2`, expanded by
/// orthogonality to `|b_i*|^2 + mu^2 |b_{i-1}*|^2`.
pub fn is_lovasz(gso: &GsoData, params: &ReductionParams) -> bool {
    (1..gso.dim()).all(|i| {
        let mu = &gso.mu[i][i - 1];
        let lhs = &gso.norms_sq[i] + mu * mu * &gso.norms_sq[i - 1];
        lhs >= params.alpha() * &gso.norms_sq[i - 1]
    })
}

/// Reduction parameter `alpha` with `1/4 < alpha < 1`, and the derived
/// bound base `beta = 4 / (4 alpha - 1) > 4/3`. At `alpha = 3/4`, `beta`
/// is exactly 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionParams {
    alpha: Rat,
    beta: Rat,
}

impl ReductionParams {
    pub fn new(alpha: Rat) -> Result<Self> {
        if alpha <= rat(1, 4) || alpha >= Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "reduction parameter must satisfy 1/4 < alpha < 1, got {alpha}"
            )));
        }
        let beta = rat_int(4) / (rat_int(4) * &alpha - Rat::one());
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> &Rat {
        &self.alpha
    }

    pub fn beta(&self) -> &Rat {
        &self.beta
    }
}

/// Integer column-operation matrix `U` relating an input basis to its
/// reduced form: `reduced_j = sum_i columns[j][i] * input_i`, `|det U| = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodularTransform {
    columns: Vec<Vec<BigInt>>,
}

impl UnimodularTransform {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<BigInt>] {
        &self.columns
    }

    pub fn determinant(&self) -> BigInt {
        let cols: Vec<Vec<Rat>> = self
            .columns
            .iter()
            .map(|c| c.iter().map(|x| Rat::from(x.clone())).collect())
            .collect();
        det_signed(&cols).to_integer()
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    /// Applies the recorded column operations to `basis` (used to confirm
    /// `input * U = reduced`).
    pub fn apply(&self, basis: &LatticeBasis) -> Result<LatticeBasis> {
        if basis.dim() != self.dim() {
            return Err(Error::InvalidParameter(
                "transform and basis dimensions differ".into(),
            ));
        }
        let dim = self.dim();
        let vectors = (0..dim)
            .map(|j| {
                let mut out = vec![Rat::zero(); dim];
                for (i, coeff) in self.columns[j].iter().enumerate() {
                    if coeff.is_zero() {
                        continue;
                    }
                    let c = Rat::from(coeff.clone());
                    for (o, x) in out.iter_mut().zip(basis.vector(i)) {
                        *o += &c * x;
                    }
                }
                out
            })
            .collect();
        LatticeBasis::new(vectors)
    }
}

/// Signed determinant of a square column matrix by fraction elimination.
fn det_signed(cols: &[Vec<Rat>]) -> Rat {
    let n = cols.len();
    let mut m: Vec<Vec<Rat>> = cols.to_vec();
    let mut det = Rat::one();
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !m[col][r].is_zero()) {
            Some(p) => p,
            None => return Rat::zero(),
        };
        if pivot != col {
            for c in m.iter_mut() {
                c.swap(col, pivot);
            }
            det = -det;
        }
        let pivot_val = m[col][col].clone();
        det *= &pivot_val;
        for other in col + 1..n {
            if m[other][col].is_zero() {
                continue;
            }
            let factor = &m[other][col] / &pivot_val;
            for r in col..n {
                let t = &factor * &m[col][r];
                m[other][r] -= t;
            }
        }
    }
    det
}

/// `|det|` of the lattice spanned by `basis` (zero if degenerate).
pub fn lattice_det(basis: &LatticeBasis) -> Rat {
    det_signed(basis.vectors()).abs()
}

/// Applies `b_k -= round(mu_{k,l}) * b_l` and keeps `u` and the mu rows in
/// step. Rounding ties toward zero leaves `|mu_{k,l}| = 1/2` untouched,
/// matching the `<= 1/2` size-reduction target.
fn size_reduce_against(
    b: &mut [Vec<Rat>],
    u: &mut [Vec<BigInt>],
    mu: &mut [Vec<Rat>],
    k: usize,
    l: usize,
) {
    let r = round_ties_to_zero(&mu[k][l]);
    if r.is_zero() {
        return;
    }
    let r_rat = Rat::from(r.clone());
    {
        let (left, right) = b.split_at_mut(k);
        for (x, y) in right[0].iter_mut().zip(&left[l]) {
            *x -= &r_rat * y;
        }
    }
    {
        let (left, right) = u.split_at_mut(k);
        for (x, y) in right[0].iter_mut().zip(&left[l]) {
            *x -= &r * y;
        }
    }
    let (left, right) = mu.split_at_mut(k);
    let row_l = &left[l];
    let row_k = &mut right[0];
    for j in 0..l {
        let t = &r_rat * &row_l[j];
        row_k[j] -= t;
    }
    row_k[l] -= r_rat;
}

/// LLL reduction. Returns the reduced basis together with the unimodular
/// transform `U` such that `input * U = reduced`.
pub fn lll_reduce(
    basis: &LatticeBasis,
    params: &ReductionParams,
) -> Result<(LatticeBasis, UnimodularTransform)> {
    let n = basis.dim();
    let mut b = basis.vectors().to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let (_, mut mu, mut bnorm) = gso_raw(&b)?;
    let mut swaps = 0u64;

    let mut k = 1;
    while k < n {
        size_reduce_against(&mut b, &mut u, &mut mu, k, k - 1);
        let mu_k = mu[k][k - 1].clone();
        let exchange_rhs = (params.alpha() - &mu_k * &mu_k) * &bnorm[k - 1];
        if bnorm[k] < exchange_rhs {
            b.swap(k - 1, k);
            u.swap(k - 1, k);
            // The first k-1 entries of mu rows k-1 and k trade places; the
            // remaining coefficients and norms follow the update formulas
            // for exchanging adjacent vectors.
            {
                let (head, tail) = mu.split_at_mut(k);
                let row_prev = &mut head[k - 1];
                let row_k = &mut tail[0];
                for j in 0..k - 1 {
                    std::mem::swap(&mut row_prev[j], &mut row_k[j]);
                }
            }
            let bk = bnorm[k].clone();
            let bk1 = bnorm[k - 1].clone();
            let bnew = &bk + &mu_k * &mu_k * &bk1;
            mu[k][k - 1] = &mu_k * &bk1 / &bnew;
            bnorm[k] = &bk1 * &bk / &bnew;
            bnorm[k - 1] = bnew;
            let mu_new = mu[k][k - 1].clone();
            for i in k + 1..n {
                let t = mu[i][k].clone();
                mu[i][k] = &mu[i][k - 1] - &mu_k * &t;
                mu[i][k - 1] = &t + &mu_new * &mu[i][k];
            }
            swaps += 1;
            k = if k > 1 { k - 1 } else { 1 };
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                size_reduce_against(&mut b, &mut u, &mut mu, k, l);
            }
            k += 1;
        }
    }
    log::debug!("lll_reduce: dim {n}, {swaps} swaps");
    Ok((
        LatticeBasis { vectors: b },
        UnimodularTransform { columns: u },
    ))
}

/// One verified inequality, with a witness rendered on failure.
#[derive(Clone, Debug)]
pub struct BoundCheck {
    pub holds: bool,
    pub detail: String,
}

impl BoundCheck {
    fn ok() -> Self {
        Self {
            holds: true,
            detail: String::new(),
        }
    }

    fn failed(detail: String) -> Self {
        Self {
            holds: false,
            detail,
        }
    }
}

/// The three norm guarantees of a reduced basis, each decided exactly:
///
/// 1. `|b_j|^2 <= beta^(i-1) |b_i*|^2` for `j <= i`;
/// 2. `det^2 <= prod |b_i|^2 <= beta^(n(n-1)/2) det^2`;
/// 3. `|b_1| <= beta^((n-1)/4) det^(1/n)`, checked in the 2n-th power via
///    a symbolic fractional power.
#[derive(Clone, Debug)]
pub struct ReducedBoundsReport {
    pub vector_vs_ortho: BoundCheck,
    pub det_vs_product: BoundCheck,
    pub first_vector: BoundCheck,
}

impl ReducedBoundsReport {
    pub fn all_hold(&self) -> bool {
        self.vector_vs_ortho.holds && self.det_vs_product.holds && self.first_vector.holds
    }
}

pub fn check_reduced_bounds(
    basis: &LatticeBasis,
    gso: &GsoData,
    params: &ReductionParams,
) -> Result<ReducedBoundsReport> {
    let n = basis.dim();
    if gso.dim() != n {
        return Err(Error::InvalidParameter(
            "Gram-Schmidt data does not match the basis dimension".into(),
        ));
    }
    let beta = params.beta();
    let norms: Vec<Rat> = basis.vectors().iter().map(|v| norm_sq(v)).collect();

    let mut vector_vs_ortho = BoundCheck::ok();
    'outer: for i in 0..n {
        let cap = rat_pow(beta, i as i64) * &gso.norms_sq()[i];
        for (j, nj) in norms.iter().enumerate().take(i + 1) {
            if *nj > cap {
                vector_vs_ortho = BoundCheck::failed(format!(
                    "|b_{}|^2 = {} > beta^{} * |b_{}*|^2 = {}",
                    j + 1,
                    nj,
                    i,
                    i + 1,
                    cap
                ));
                break 'outer;
            }
        }
    }

    let det = lattice_det(basis);
    let det_sq = &det * &det;
    let product: Rat = norms.iter().fold(Rat::one(), |acc, x| acc * x);
    let hadamard_cap = rat_pow(beta, (n as i64) * (n as i64 - 1) / 2) * &det_sq;
    let det_vs_product = if det_sq > product {
        BoundCheck::failed(format!("det^2 = {det_sq} > prod |b_i|^2 = {product}"))
    } else if product > hadamard_cap {
        BoundCheck::failed(format!(
            "prod |b_i|^2 = {product} > beta^(n(n-1)/2) * det^2 = {hadamard_cap}"
        ))
    } else {
        BoundCheck::ok()
    };

    // |b_1|^2 <= (beta^(n(n-1)/2) det^2)^(1/n), cross-powered.
    let cap = FracPower::new(hadamard_cap.clone(), 1, n as i64)?;
    let first_vector = match cmp_frac_power(&norms[0], &cap) {
        Ok(std::cmp::Ordering::Greater) => BoundCheck::failed(format!(
            "|b_1|^2 = {} > ({})^(1/{})",
            norms[0], hadamard_cap, n
        )),
        Ok(_) => BoundCheck::ok(),
        // |b_1| = 0 cannot occur for a basis with Gram-Schmidt data.
        Err(e) => return Err(e),
    };

    Ok(ReducedBoundsReport {
        vector_vs_ortho,
        det_vs_product,
        first_vector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_of(cols: &[&[i64]]) -> LatticeBasis {
        LatticeBasis::new(
            cols.iter()
                .map(|c| c.iter().map(|&x| rat_int(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn params_34() -> ReductionParams {
        ReductionParams::new(rat(3, 4)).unwrap()
    }

    #[test]
    fn beta_at_classical_alpha_is_two() {
        assert_eq!(params_34().beta(), &rat_int(2));
        assert_eq!(ReductionParams::new(rat(1, 2)).unwrap().beta(), &rat_int(4));
        assert_eq!(
            ReductionParams::new(rat(5, 16)).unwrap().beta(),
            &rat_int(16)
        );
        assert_eq!(
            ReductionParams::new(rat(99, 100)).unwrap().beta(),
            &rat(50, 37)
        );
        assert!(ReductionParams::new(rat(1, 4)).is_err());
        assert!(ReductionParams::new(rat_int(1)).is_err());
        assert!(ReductionParams::new(rat(9, 8)).is_err());
    }

    #[test]
    fn gram_schmidt_known_values() {
        // b1 = (1,1), b2 = (0,1): mu_21 = 1/2, b2* = (-1/2, 1/2).
        let basis = basis_of(&[&[1, 1], &[0, 1]]);
        let gso = gram_schmidt(&basis).unwrap();
        assert_eq!(gso.mu(1, 0), &rat(1, 2));
        assert_eq!(gso.ortho()[1], vec![rat(-1, 2), rat(1, 2)]);
        assert_eq!(gso.norms_sq(), &[rat_int(2), rat(1, 2)]);

        // b1 = (2,1), b2 = (1,3): mu_21 = <b2,b1>/|b1|^2 = 5/5 = 1.
        let basis = basis_of(&[&[2, 1], &[1, 3]]);
        let gso = gram_schmidt(&basis).unwrap();
        assert_eq!(gso.mu(1, 0), &rat_int(1));
        assert_eq!(gso.ortho()[1], vec![rat_int(-1), rat_int(2)]);
    }

    #[test]
    fn gram_schmidt_detects_dependence() {
        let basis = basis_of(&[&[1, 2], &[2, 4]]);
        assert_eq!(gram_schmidt(&basis), Err(Error::LinearDependence));
    }

    #[test]
    fn lll_reduces_classic_example() {
        // Columns (1, 1), (0, 1) are already reduced; (201, 200), (1, 1)
        // style skew bases are not.
        let basis = basis_of(&[&[1, 0], &[4, 1]]);
        let params = params_34();
        let (reduced, transform) = lll_reduce(&basis, &params).unwrap();
        let gso = gram_schmidt(&reduced).unwrap();
        assert!(is_size_reduced(&gso));
        assert!(is_lovasz(&gso, &params));
        assert!(transform.is_unimodular());
        assert_eq!(transform.apply(&basis).unwrap(), reduced);
        // The shortest vector of this lattice has norm 1.
        assert_eq!(norm_sq(reduced.vector(0)), rat_int(1));
    }

    #[test]
    fn lll_preserves_determinant_and_certifies() {
        let basis = basis_of(&[&[12, 2, -3], &[4, -7, 5], &[1, 9, 2]]);
        let params = params_34();
        let before = lattice_det(&basis);
        let (reduced, transform) = lll_reduce(&basis, &params).unwrap();
        assert_eq!(lattice_det(&reduced), before);
        assert!(transform.is_unimodular());
        assert_eq!(transform.apply(&basis).unwrap(), reduced);
        let gso = gram_schmidt(&reduced).unwrap();
        assert!(is_size_reduced(&gso));
        assert!(is_lovasz(&gso, &params));
        let report = check_reduced_bounds(&reduced, &gso, &params).unwrap();
        assert!(report.all_hold(), "{report:?}");
    }

    #[test]
    fn lll_dimension_one_is_identity() {
        let basis = basis_of(&[&[-7]]);
        let (reduced, transform) = lll_reduce(&basis, &params_34()).unwrap();
        assert_eq!(reduced, basis);
        assert!(transform.is_unimodular());
    }

    #[test]
    fn reduced_bounds_fail_on_unreduced_basis() {
        // A strongly skewed 2d basis violates the first-vector bound.
        let basis = basis_of(&[&[100, 99], &[99, 98]]);
        let gso = gram_schmidt(&basis).unwrap();
        let report = check_reduced_bounds(&basis, &gso, &params_34()).unwrap();
        assert!(!report.all_hold());
        assert!(!report.first_vector.holds || !report.vector_vs_ortho.holds);
    }

    #[test]
    fn determinant_helpers() {
        let basis = basis_of(&[&[2, 0], &[0, 3]]);
        assert_eq!(lattice_det(&basis), rat_int(6));
        let basis = basis_of(&[&[0, 1], &[1, 0]]);
        assert_eq!(lattice_det(&basis), rat_int(1));
        let degenerate = basis_of(&[&[1, 1], &[2, 2]]);
        assert_eq!(lattice_det(&degenerate), rat_int(0));
    }

    #[test]
    fn rejects_non_square_input() {
        assert!(LatticeBasis::new(vec![vec![rat_int(1)], vec![rat_int(2)]]).is_err());
        assert!(LatticeBasis::new(vec![]).is_err());
    }
}
