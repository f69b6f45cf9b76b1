//! Valuation functions over item bundles: additive, XOS (max of additive
//! clauses) and a budget-capped wrapper.
//!
//! Bundles are bit masks; item `j` is bit `j`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest item count for which subset enumeration is attempted.
pub const MAX_ENUM_ITEMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Valuation {
    Additive {
        values: Vec<f64>,
    },
    Xos {
        clauses: Vec<Vec<f64>>,
    },
    BudgetCapped {
        inner: Box<Valuation>,
        #[serde(with = "crate::ext::one")]
        cap: f64,
    },
}

fn masked_sum(values: &[f64], mask: u64) -> f64 {
    values.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, v)| v).sum()
}

/// Bit mask of a list of item indices, checked against `m`.
pub fn bundle_mask(items: &[usize], m: usize) -> Result<u64> {
    let mut mask = 0u64;
    for &j in items {
        if j >= m || j >= 64 {
            return Err(Error::UnknownItem { item: j, m });
        }
        mask |= 1 << j;
    }
    Ok(mask)
}

impl Valuation {
    pub fn additive(values: Vec<f64>) -> Self {
        Valuation::Additive { values }
    }

    pub fn xos(clauses: Vec<Vec<f64>>) -> Self {
        Valuation::Xos { clauses }
    }

    /// Number of items the valuation is defined on.
    pub fn items(&self) -> usize {
        match self {
            Valuation::Additive { values } => values.len(),
            Valuation::Xos { clauses } => clauses.first().map_or(0, Vec::len),
            Valuation::BudgetCapped { inner, .. } => inner.items(),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        match self {
            Valuation::Additive { values } => {
                if values.len() != m {
                    return bad(format!("additive valuation has {} values, expected {m}", values.len()));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("additive values must be finite and non-negative".into());
                }
            }
            Valuation::Xos { clauses } => {
                if clauses.is_empty() {
                    return bad("XOS valuation needs at least one clause".into());
                }
                for c in clauses {
                    if c.len() != m {
                        return bad(format!("XOS clause has {} values, expected {m}", c.len()));
                    }
                    if c.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                        return bad("XOS clause values must be finite and non-negative".into());
                    }
                }
            }
            Valuation::BudgetCapped { inner, cap } => {
                if !(*cap > 0.0) {
                    return bad(format!("budget cap must be positive, got {cap}"));
                }
                inner.validate(m)?;
            }
        }
        Ok(())
    }

    /// Value of the bundle given as a bit mask.
    pub fn value(&self, mask: u64) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        match self {
            Valuation::Additive { values } => masked_sum(values, mask),
            Valuation::Xos { clauses } => clauses.iter().map(|c| masked_sum(c, mask)).fold(0.0, f64::max),
            Valuation::BudgetCapped { inner, cap } => inner.value(mask).min(*cap),
        }
    }

    /// Value of the bundle given as item indices.
    pub fn evaluate(&self, items: &[usize]) -> Result<f64> {
        Ok(self.value(bundle_mask(items, self.items())?))
    }

    /// `min(v, cap)`; an infinite cap leaves the valuation untouched.
    pub fn budget_cap(&self, cap: f64) -> Result<Valuation> {
        if !(cap > 0.0) {
            return Err(Error::InvalidParameter(format!("budget cap must be positive, got {cap}")));
        }
        if cap.is_infinite() {
            return Ok(self.clone());
        }
        Ok(Valuation::BudgetCapped { inner: Box::new(self.clone()), cap })
    }

    /// `s * v`, scaling caps as well.
    pub fn scaled(&self, s: f64) -> Valuation {
        match self {
            Valuation::Additive { values } => Valuation::Additive { values: values.iter().map(|v| v * s).collect() },
            Valuation::Xos { clauses } => {
                Valuation::Xos { clauses: clauses.iter().map(|c| c.iter().map(|v| v * s).collect()).collect() }
            }
            Valuation::BudgetCapped { inner, cap } => {
                Valuation::BudgetCapped { inner: Box::new(inner.scaled(s)), cap: cap * s }
            }
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, Valuation::Additive { .. })
    }

    /// Additive representative for `bundle`: a vector `a` with
    /// `sum_{j in bundle} a_j = v(bundle)` and `sum_{j in S} a_j <= v(S)` for all S.
    ///
    /// Additive valuations return their own values and XOS the first maximizing
    /// clause. A capped valuation takes the inner representative, zeroes it
    /// outside the bundle and scales it down to the cap; the second property is
    /// then re-checked over all subsets, so this refuses when m > 16.
    pub fn representative(&self, bundle: u64) -> Result<Vec<f64>> {
        match self {
            Valuation::Additive { values } => Ok(values.clone()),
            Valuation::Xos { clauses } => {
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                for (k, c) in clauses.iter().enumerate() {
                    let v = masked_sum(c, bundle);
                    if v > best_v {
                        best_v = v;
                        best = k;
                    }
                }
                Ok(clauses[best].clone())
            }
            Valuation::BudgetCapped { inner, cap } => {
                let m = self.items();
                if m > MAX_ENUM_ITEMS {
                    return Err(Error::NotXos(format!(
                        "capped representative needs subset enumeration, m = {m} > {MAX_ENUM_ITEMS}"
                    )));
                }
                let base = inner.representative(bundle)?;
                let mut rep: Vec<f64> =
                    base.iter().enumerate().map(|(j, &v)| if bundle >> j & 1 == 1 { v } else { 0.0 }).collect();
                let total: f64 = rep.iter().sum();
                if total > *cap {
                    let s = cap / total;
                    rep.iter_mut().for_each(|v| *v *= s);
                }
                if !self.supports(&rep, m) {
                    return Err(Error::NotXos("capped representative violates the lower-bound property".into()));
                }
                Ok(rep)
            }
        }
    }

    /// True when `sum_{j in S} a_j <= v(S)` for every subset S of the m items.
    pub fn supports(&self, a: &[f64], m: usize) -> bool {
        (0u64..1 << m).all(|s| masked_sum(a, s) <= self.value(s) + 1e-12 * (1.0 + self.value(s)))
    }

    /// Brute-force XOS check over all bundles: each bundle has a supporting
    /// additive witness that is exact on it.
    pub fn is_xos_on_all_bundles(&self, m: usize) -> bool {
        if m > MAX_ENUM_ITEMS {
            return false;
        }
        (0u64..1 << m).all(|s| match self.representative(s) {
            Ok(rep) => (masked_sum(&rep, s) - self.value(s)).abs() <= 1e-12 * (1.0 + self.value(s)) && self.supports(&rep, m),
            Err(_) => false,
        })
    }

    /// Fractional subadditivity: `v(T) <= sum alpha_S v(S)` for every
    /// fractional cover of T. On a finite ground set this is equivalent to the
    /// per-bundle witness condition, which is what gets checked.
    pub fn is_fractionally_subadditive(&self, m: usize) -> bool {
        self.is_xos_on_all_bundles(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_examples() {
        assert_eq!(Valuation::additive(vec![1.0, 0.3]).evaluate(&[0, 1]).unwrap(), 1.3);
        let x = Valuation::xos(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(x.evaluate(&[0, 1]).unwrap(), 1.0);
        let c = Valuation::additive(vec![1.0, 1.0]).budget_cap(1.5).unwrap();
        assert_eq!(c.evaluate(&[0, 1]).unwrap(), 1.5);
        assert_eq!(c.evaluate(&[]).unwrap(), 0.0);
        assert!(matches!(c.evaluate(&[2]), Err(Error::UnknownItem { item: 2, m: 2 })));
    }

    #[test]
    fn cap_examples() {
        let v = Valuation::additive(vec![2.0, 2.0]);
        let inf = v.budget_cap(f64::INFINITY).unwrap();
        for s in 0..4 {
            assert_eq!(inf.value(s), v.value(s));
        }
        assert_eq!(v.budget_cap(3.0).unwrap().value(3), 3.0);
        assert!(v.budget_cap(0.0).is_err());
        assert!(v.budget_cap(-1.0).is_err());
    }

    #[test]
    fn xos_representative_is_clause_argmax() {
        let x = Valuation::xos(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(x.representative(0b01).unwrap(), vec![1.0, 0.0]);
        assert_eq!(x.representative(0b10).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn capped_xos_stays_xos() {
        let x = Valuation::xos(vec![vec![1.0, 0.5, 0.2], vec![0.1, 0.9, 0.8], vec![0.6, 0.6, 0.6]]);
        for cap in [0.3, 0.9, 1.4, 5.0] {
            assert!(x.budget_cap(cap).unwrap().is_xos_on_all_bundles(3));
        }
    }

    #[test]
    fn supports_rejects_vectors_above_the_valuation() {
        let v = Valuation::xos(vec![vec![1.5, 1.5]]);
        assert!(v.supports(&[1.5, 1.0], 2));
        assert!(!v.supports(&[2.0, 1.0], 2));
    }

    #[test]
    fn json_round_trip() {
        let c = Valuation::BudgetCapped { inner: Box::new(Valuation::xos(vec![vec![1.0, 2.0]])), cap: f64::INFINITY };
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"inf\""));
        let back: Valuation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
