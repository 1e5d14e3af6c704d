//! The resonant cubic nonlinearity `F_j(u) = Σ_{R(j)} u_{j1} ū_{j2} u_{j3}`.
//!
//! The resonance set `R(j)` consists of triples with `j1 - j2 + j3 = j` and
//! `j1² - j2² + j3² = j²`, which forces `j1 = j` or `j3 = j`. Summing over it
//! gives the closed form `2(Σ_k |u_k|^2) u_j - |u_j|^2 u_j`, valid for any set
//! of distinct integer labels.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::VecField;
use crate::real::{pairwise_sum, Real};

/// Hard limit for the `O(N^3)` enumeration route.
pub const BRUTE_FORCE_MAX_COMPONENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResonanceSet {
    pub j: i64,
    pub triples: Vec<(i64, i64, i64)>,
}

impl ResonanceSet {
    pub fn cardinality(&self) -> usize {
        self.triples.len()
    }
}

/// Enumerate `R(j)` over `index_set^3`.
pub fn resonance_set(j: i64, index_set: &[i64]) -> Result<ResonanceSet> {
    if !index_set.contains(&j) {
        return Err(Error::LabelNotInIndexSet(j));
    }
    let mut triples = Vec::new();
    for &j1 in index_set {
        for &j2 in index_set {
            for &j3 in index_set {
                if j1 - j2 + j3 == j && j1 * j1 - j2 * j2 + j3 * j3 == j * j {
                    triples.push((j1, j2, j3));
                }
            }
        }
    }
    Ok(ResonanceSet { j, triples })
}

/// `F(u)` by literal summation over every resonance set.
pub fn apply_nonlinearity_bruteforce<T: Real>(u: &VecField<T>) -> Result<VecField<T>> {
    let n = u.n_components();
    if n > BRUTE_FORCE_MAX_COMPONENTS {
        return Err(Error::TooManyComponents { n, limit: BRUTE_FORCE_MAX_COMPONENTS });
    }
    let labels = u.labels().to_vec();
    let slot = |label: i64| labels.iter().position(|&l| l == label).expect("label in set");
    let mut out = VecField::zeros(u.grid(), labels.clone())?;
    for (c, &j) in labels.iter().enumerate() {
        let set = resonance_set(j, &labels)?;
        let idx: Vec<_> = set.triples.iter().map(|&(a, b, c)| (slot(a), slot(b), slot(c))).collect();
        let target = out.component_mut(c);
        for &(a, b, cc) in &idx {
            let (ua, ub, uc) = (u.component(a), u.component(b), u.component(cc));
            for (p, t) in target.iter_mut().enumerate() {
                *t = *t + ua[p] * ub[p].conj() * uc[p];
            }
        }
    }
    Ok(out)
}

/// `F(u)` in closed form, `O(N)` per grid point.
pub fn apply_nonlinearity<T: Real>(u: &VecField<T>) -> VecField<T> {
    let rho = u.density();
    let two = T::lit(2.0);
    let mut out = u.clone();
    for comp in out.components_mut() {
        for (z, &r) in comp.iter_mut().zip(&rho) {
            *z = *z * (two * r - z.norm_sqr());
        }
    }
    out
}

/// Pointwise `Σ_j ū_j F_j = 2(Σ_j|u_j|^2)^2 - Σ_j|u_j|^4`.
pub fn quartic_density<T: Real>(u: &VecField<T>) -> Vec<T> {
    let mut sum = vec![T::zero(); u.grid().len()];
    let mut fourth = vec![T::zero(); u.grid().len()];
    for comp in u.components() {
        for ((s, q), z) in sum.iter_mut().zip(fourth.iter_mut()).zip(comp) {
            let r = z.norm_sqr();
            *s = *s + r;
            *q = *q + r * r;
        }
    }
    let two = T::lit(2.0);
    sum.iter().zip(&fourth).map(|(&s, &q)| two * s * s - q).collect()
}

/// `𝒩(u) = ∫ Σ_j ū_j F_j(u) dx`.
pub fn quartic_functional<T: Real>(u: &VecField<T>) -> T {
    pairwise_sum(&quartic_density(u)) * u.grid().cell_area()
}

/// Pointwise `ū_j F_j` for one component (real up to round-off).
pub fn pairing<T: Real>(u: &VecField<T>, f: &VecField<T>, c: usize) -> Vec<Complex<T>> {
    u.component(c).iter().zip(f.component(c)).map(|(a, b)| a.conj() * b).collect()
}
