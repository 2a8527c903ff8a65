use std::collections::BTreeMap;

use rand::Rng;

use super::fp::{check_prime, FpMatrix, FpPoly};
use crate::arith::{fp_inv, Param};
use crate::error::{Error, Result};
use crate::operators::{FamilyId, OperatorFamily};

/// Largest fallback search accepted by default.
pub const MEMBERSHIP_BUDGET: u128 = 1 << 20;

/// A family chart with coefficients reduced mod `p`.
#[derive(Clone, Debug)]
pub struct FpChart {
    p: u32,
    n: usize,
    id: FamilyId,
    params: Vec<Param>,
    nums: Vec<FpPoly>,
    dens: Vec<FpPoly>,
    constraints: Vec<FpPoly>,
}

impl FpChart {
    /// `fam` must have its algebra parameters bound already.
    pub fn new(fam: &OperatorFamily, p: u32) -> Result<Self> {
        check_prime(p)?;
        if fam.malformed {
            return Err(Error::Usage(format!("family {} is malformed", fam.id())));
        }
        let n = fam.chart.len();
        let mut used = fam.chart_params();
        for c in &fam.constraints {
            used.extend(c.params());
        }
        if let Some(stray) = used.iter().find(|q| !fam.free.contains(q)) {
            return Err(Error::UnboundParam(stray.to_string()));
        }
        let params: Vec<Param> = used.into_iter().collect();
        let vars: BTreeMap<Param, usize> = params
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, q)| (q, i))
            .collect();
        let mut nums = Vec::with_capacity(n * n);
        let mut dens = Vec::with_capacity(n * n);
        for e in fam.chart.iter().flatten() {
            nums.push(FpPoly::compile(e.num(), &vars, p)?);
            dens.push(FpPoly::compile(e.den(), &vars, p)?);
        }
        let mut constraints = Vec::with_capacity(fam.constraints.len());
        for c in &fam.constraints {
            constraints.push(FpPoly::compile(c.num(), &vars, p)?);
            if !c.is_polynomial() {
                constraints.push(FpPoly::compile(c.den(), &vars, p)?);
            }
        }
        Ok(FpChart {
            p,
            n,
            id: fam.id(),
            params,
            nums,
            dens,
            constraints,
        })
    }

    pub fn id(&self) -> &FamilyId {
        &self.id
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    /// The chart at `point`, or `None` off its domain.
    pub fn evaluate(&self, point: &[u32]) -> Option<FpMatrix> {
        let p = u64::from(self.p);
        if self.constraints.iter().any(|c| c.eval(point, p) == 0) {
            return None;
        }
        let mut entries = Vec::with_capacity(self.n * self.n);
        for (num, den) in self.nums.iter().zip(&self.dens) {
            let d = den.eval(point, p) as u32;
            let inv = fp_inv(d, self.p)?;
            entries.push((num.eval(point, p) * u64::from(inv) % p) as u32);
        }
        Some(FpMatrix::new(self.p, self.n, entries).expect("reduced entries"))
    }

    /// Whether some admissible assignment of the parameters gives `m`.
    /// Parameters appearing alone in an entry are read off; the rest are
    /// searched exhaustively within `budget`.
    pub fn contains(&self, m: &FpMatrix, budget: u128) -> Result<bool> {
        if m.p() != self.p || m.dim() != self.n {
            return Ok(false);
        }
        let p = u64::from(self.p);
        let mut fixed: Vec<Option<u32>> = vec![None; self.params.len()];
        for (k, (num, den)) in self.nums.iter().zip(&self.dens).enumerate() {
            if den.vars().next().is_some() {
                continue;
            }
            let d = den.eval(&[], p);
            if d == 0 {
                return Ok(false);
            }
            let target = u64::from(m.entries()[k]) * d % p;
            if num.vars().next().is_none() {
                if num.eval(&[], p) != target {
                    return Ok(false);
                }
            } else if let Some((c, v, k0)) = num.as_affine() {
                let c_inv = u64::from(fp_inv(c as u32, self.p).expect("nonzero coefficient"));
                let x = ((target + p - k0) % p * c_inv % p) as u32;
                match fixed[v] {
                    Some(y) if y != x => return Ok(false),
                    _ => fixed[v] = Some(x),
                }
            }
        }
        let open: Vec<usize> = (0..fixed.len()).filter(|&v| fixed[v].is_none()).collect();
        let mut size: u128 = 1;
        for _ in &open {
            size = size.saturating_mul(u128::from(self.p));
        }
        if size > budget {
            return Err(Error::RefusedSize { size, budget });
        }
        let mut point: Vec<u32> = fixed.iter().map(|v| v.unwrap_or(0)).collect();
        for t in 0..size {
            let mut x = t;
            for &v in &open {
                point[v] = (x % u128::from(self.p)) as u32;
                x /= u128::from(self.p);
            }
            if self.evaluate(&point).as_ref() == Some(m) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// A uniformly random assignment inside the domain, if one turns up
    /// within `tries` draws.
    pub fn sample<R: Rng>(&self, rng: &mut R, tries: usize) -> Option<(Vec<u32>, FpMatrix)> {
        for _ in 0..tries {
            let point: Vec<u32> = self
                .params
                .iter()
                .map(|_| rng.gen_range(0..self.p))
                .collect();
            if let Some(m) = self.evaluate(&point) {
                return Some((point, m));
            }
        }
        None
    }
}

pub fn chart_membership(fam: &OperatorFamily, m: &FpMatrix, budget: u128) -> Result<bool> {
    FpChart::new(fam, m.p())?.contains(m, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::parse_families;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use serde_json::json;

    fn families() -> Vec<OperatorFamily> {
        parse_families(&json!([
            {"algebra": "L1", "kind": "rota-baxter", "weight": "0",
             "chart": [["0","0","0","0"],["0","0","0","0"],["r31","r32","r33","0"],["r41","r42","r43","0"]],
             "free": ["r31","r32","r33","r41","r42","r43"], "constraints": []},
            {"algebra": "L1", "kind": "rota-baxter", "weight": "0",
             "chart": [["0","0","0","0"],["0","r22","0","0"],["0","r32","0","0"],["r41","r42","r43","-(r22*r43)/r32"]],
             "free": ["r22","r32","r41","r42","r43"], "constraints": ["r32"]}
        ]))
        .unwrap()
    }

    fn mat(p: u32, rows: [[u32; 4]; 4]) -> FpMatrix {
        FpMatrix::new(p, 4, rows.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn read_off_and_forced_zeros() {
        let f = &families()[0];
        let m = mat(3, [[0, 0, 0, 0], [0, 0, 0, 0], [1, 2, 0, 0], [2, 2, 1, 0]]);
        assert!(chart_membership(f, &m, MEMBERSHIP_BUDGET).unwrap());
        let bad = mat(3, [[1, 0, 0, 0], [0, 0, 0, 0], [1, 2, 0, 0], [2, 2, 1, 0]]);
        assert!(!chart_membership(f, &bad, MEMBERSHIP_BUDGET).unwrap());
        assert!(chart_membership(f, &FpMatrix::zero(2, 4), MEMBERSHIP_BUDGET).unwrap());
    }

    #[test]
    fn denominator_constraint() {
        let f = &families()[1];
        // r32 = 0 is outside the chart even though every other entry matches.
        assert!(!chart_membership(f, &FpMatrix::zero(2, 4), MEMBERSHIP_BUDGET).unwrap());
        let m = mat(2, [[0, 0, 0, 0], [0, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1]]);
        assert!(chart_membership(f, &m, MEMBERSHIP_BUDGET).unwrap());
        let off = mat(2, [[0, 0, 0, 0], [0, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]);
        assert!(!chart_membership(f, &off, MEMBERSHIP_BUDGET).unwrap());
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in families() {
            for p in [2, 7] {
                let chart = FpChart::new(&f, p).unwrap();
                for _ in 0..100 {
                    let (_, m) = chart.sample(&mut rng, 1000).unwrap();
                    assert!(
                        chart.contains(&m, MEMBERSHIP_BUDGET).unwrap(),
                        "{} {m}",
                        f.id()
                    );
                }
            }
        }
    }

    #[test]
    fn refuses_large_fallback() {
        let f = parse_families(&json!([{"algebra": "L1", "kind": "nijenhuis",
            "chart": [["x*y","0","0","0"],["0","0","0","0"],["0","0","0","0"],["0","0","0","0"]],
            "free": ["x","y"], "constraints": []}]))
        .unwrap();
        let chart = FpChart::new(&f[0], 7).unwrap();
        let m = FpMatrix::zero(7, 4);
        assert!(matches!(
            chart.contains(&m, 10),
            Err(Error::RefusedSize { size: 49, .. })
        ));
        assert!(chart.contains(&m, 49).unwrap());
    }
}
