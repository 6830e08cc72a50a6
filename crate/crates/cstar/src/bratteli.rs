//! Bratteli diagrams and K0 of AF inductive limits.
//!
//! A diagram stores the block sizes of each finite-dimensional stage and the
//! nonnegative-integer multiplicity matrices of the connecting maps. K0
//! classes live at a level as integer vectors and propagate forward through
//! the multiplicity matrices; equality and positivity in the limit are
//! decided by propagation, with injectivity of the remaining maps certifying
//! `distinct`/`not_positive` verdicts and a tri-state `undecided` escape when
//! the horizon runs out first.

use serde::de::Deserializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ktheory::K0Class;

/// Outcome of a limit-group equality query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum K0Equality {
    Equal,
    Distinct,
    UndecidedAtHorizon,
}

/// Outcome of a limit-group positivity query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum K0Positivity {
    Positive,
    NotPositive,
    UndecidedAtHorizon,
}

/// A Bratteli diagram: block-size vectors per level and the multiplicity
/// matrices connecting consecutive levels. Levels are 1-based in the public
/// interface.
#[derive(Debug, Clone, Serialize)]
pub struct BratteliDiagram {
    levels: Vec<Vec<u64>>,
    /// `maps[k]`: shape `len(levels[k+1]) x len(levels[k])`.
    maps: Vec<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unital: Option<bool>,
}

impl<'de> Deserialize<'de> for BratteliDiagram {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            levels: Vec<Vec<u64>>,
            maps: Vec<Vec<Vec<u64>>>,
            #[serde(default)]
            unital: Option<bool>,
        }
        let raw = Raw::deserialize(deserializer)?;
        BratteliDiagram::new(raw.levels, raw.maps, raw.unital)
            .map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

impl BratteliDiagram {
    pub fn new(levels: Vec<Vec<u64>>, maps: Vec<Vec<Vec<u64>>>, unital: Option<bool>) -> Result<Self> {
        let op = "BratteliDiagram::new";
        if levels.is_empty() {
            return Err(Error::InvalidArgument { op, detail: "no levels".into() });
        }
        if maps.len() + 1 != levels.len() {
            return Err(Error::InvalidArgument {
                op,
                detail: format!("{} levels need {} maps, got {}", levels.len(), levels.len() - 1, maps.len()),
            });
        }
        for (k, level) in levels.iter().enumerate() {
            if level.is_empty() || level.iter().any(|&n| n == 0) {
                return Err(Error::InvalidArgument {
                    op,
                    detail: format!("level {} must consist of positive sizes", k + 1),
                });
            }
        }
        for (k, m) in maps.iter().enumerate() {
            let (rows, cols) = (levels[k + 1].len(), levels[k].len());
            if m.len() != rows || m.iter().any(|row| row.len() != cols) {
                return Err(Error::InvalidArgument {
                    op,
                    detail: format!("map {} must be {rows}x{cols}", k + 1),
                });
            }
        }
        let diagram = BratteliDiagram { levels, maps, unital };
        if diagram.unital == Some(true) {
            // Unital connecting maps: sizes(k+1) = M_k sizes(k).
            for k in 0..diagram.maps.len() {
                let propagated = diagram.apply_map(k, &diagram.levels[k].iter().map(|&x| x as i64).collect::<Vec<_>>());
                let expect: Vec<i64> = diagram.levels[k + 1].iter().map(|&x| x as i64).collect();
                if propagated != expect {
                    return Err(Error::CertificationFailed {
                        op,
                        detail: format!("unital flag set but sizes at level {} do not match", k + 2),
                    });
                }
            }
        }
        Ok(diagram)
    }

    /// The CAR diagram truncated at `n_levels` levels: stages `M_(2^n)` with
    /// doubling maps.
    pub fn car(n_levels: usize) -> Self {
        let levels: Vec<Vec<u64>> = (0..n_levels).map(|k| vec![1u64 << (k + 1)]).collect();
        let maps = vec![vec![vec![2u64]]; n_levels.saturating_sub(1)];
        BratteliDiagram::new(levels, maps, Some(true)).unwrap()
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Sizes at a 1-based level.
    pub fn sizes(&self, level: usize) -> Result<&[u64]> {
        self.check_level(level, "BratteliDiagram::sizes")?;
        Ok(&self.levels[level - 1])
    }

    pub fn levels(&self) -> &[Vec<u64>] {
        &self.levels
    }

    pub fn maps(&self) -> &[Vec<Vec<u64>>] {
        &self.maps
    }

    pub fn is_unital(&self) -> Option<bool> {
        self.unital
    }

    fn check_level(&self, level: usize, op: &'static str) -> Result<()> {
        if level == 0 || level > self.levels.len() {
            return Err(Error::LevelOutOfRange { op, level, levels: self.levels.len() });
        }
        Ok(())
    }

    /// Apply the 0-based map `k` (level k+1 -> level k+2 in 1-based terms).
    fn apply_map(&self, k: usize, v: &[i64]) -> Vec<i64> {
        self.maps[k]
            .iter()
            .map(|row| row.iter().zip(v).map(|(&m, &x)| m as i64 * x).sum())
            .collect()
    }

    /// Propagate a class from a 1-based level to a later one.
    pub fn propagate(&self, class: &K0Class, from: usize, to: usize) -> Result<K0Class> {
        let op = "BratteliDiagram::propagate";
        self.check_level(from, op)?;
        self.check_level(to, op)?;
        if to < from {
            return Err(Error::InvalidArgument { op, detail: "cannot propagate backwards".into() });
        }
        if class.0.len() != self.levels[from - 1].len() {
            return Err(Error::ShapeMismatch {
                op,
                detail: format!(
                    "class has {} entries, level {from} has {} blocks",
                    class.0.len(),
                    self.levels[from - 1].len()
                ),
            });
        }
        let mut v = class.0.clone();
        for k in (from - 1)..(to - 1) {
            v = self.apply_map(k, &v);
        }
        Ok(K0Class(v))
    }

    /// Whether all connecting maps from the 1-based level onward act
    /// injectively on integer vectors (full column rank over the rationals).
    fn injective_onward(&self, from: usize) -> bool {
        ((from - 1)..self.maps.len()).all(|k| integer_matrix_injective(&self.maps[k]))
    }

    /// Decide equality of two classes in the inductive limit.
    ///
    /// Both classes are propagated to the comparison level `max(m, n)`. If
    /// they coincide there (or at any level up to `max(m,n) + horizon`,
    /// capped by the end of the diagram) the verdict is `Equal`. If all
    /// stored maps from the comparison level onward are injective,
    /// non-coincidence at the comparison level is conclusive (`Distinct`);
    /// the same holds when propagation reaches the final level, since the
    /// limit of the stored chain is decided there. Otherwise the query is
    /// `UndecidedAtHorizon`.
    pub fn k0_equal(
        &self,
        x: (usize, &K0Class),
        y: (usize, &K0Class),
        horizon: usize,
    ) -> Result<K0Equality> {
        let (mx, cx) = x;
        let (my, cy) = y;
        let base = mx.max(my);
        let mut vx = self.propagate(cx, mx, base)?;
        let mut vy = self.propagate(cy, my, base)?;
        if vx == vy {
            return Ok(K0Equality::Equal);
        }
        if self.injective_onward(base) {
            return Ok(K0Equality::Distinct);
        }
        let cap = (base + horizon).min(self.levels.len());
        for level in base..cap {
            vx = K0Class(self.apply_map(level - 1, &vx.0));
            vy = K0Class(self.apply_map(level - 1, &vy.0));
            if vx == vy {
                return Ok(K0Equality::Equal);
            }
        }
        if cap == self.levels.len() {
            // The stored chain ends here; its limit group is the last level.
            return Ok(K0Equality::Distinct);
        }
        Ok(K0Equality::UndecidedAtHorizon)
    }

    /// Decide positivity of a class in the inductive limit.
    ///
    /// A class is positive when some propagated image is componentwise
    /// nonnegative. Since multiplicity matrices are entrywise nonnegative, an
    /// image that is nonpositive and nonzero can never become nonnegative
    /// under injective maps, which certifies `NotPositive`; reaching the end
    /// of the stored chain also decides (the limit cone is the image of the
    /// last level's cone).
    pub fn k0_positive(&self, x: (usize, &K0Class), horizon: usize) -> Result<K0Positivity> {
        let (m, c) = x;
        self.check_level(m, "BratteliDiagram::k0_positive")?;
        if c.0.len() != self.levels[m - 1].len() {
            return Err(Error::ShapeMismatch {
                op: "BratteliDiagram::k0_positive",
                detail: format!(
                    "class has {} entries, level {m} has {} blocks",
                    c.0.len(),
                    self.levels[m - 1].len()
                ),
            });
        }
        let cap = (m + horizon).min(self.levels.len());
        let mut v = c.0.clone();
        for level in m..=cap {
            if v.iter().all(|&a| a >= 0) {
                return Ok(K0Positivity::Positive);
            }
            if v.iter().all(|&a| a <= 0) && v.iter().any(|&a| a < 0) && self.injective_onward(level)
            {
                return Ok(K0Positivity::NotPositive);
            }
            if level < cap {
                v = self.apply_map(level - 1, &v);
            }
        }
        if cap == self.levels.len() {
            return Ok(K0Positivity::NotPositive);
        }
        Ok(K0Positivity::UndecidedAtHorizon)
    }
}

/// Injectivity of a nonnegative integer matrix as a map of integer vectors:
/// full column rank, decided exactly by fraction-free Gaussian elimination.
fn integer_matrix_injective(m: &[Vec<u64>]) -> bool {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    if cols == 0 {
        return true;
    }
    if rows < cols {
        return false;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| a[r][col] != 0) else { continue };
        a.swap(rank, pivot);
        for r in 0..rows {
            if r != rank && a[r][col] != 0 {
                let (p, q) = (a[rank][col], a[r][col]);
                for c2 in 0..cols {
                    a[r][c2] = a[r][c2] * p - a[rank][c2] * q;
                }
                // Keep entries small-ish.
                let g = row_gcd(&a[r]);
                if g > 1 {
                    for v in a[r].iter_mut() {
                        *v /= g;
                    }
                }
            }
        }
        rank += 1;
    }
    rank == cols
}

fn row_gcd(row: &[i128]) -> i128 {
    row.iter().fold(0i128, |acc, &x| gcd128(acc, x.abs()))
}

fn gcd128(a: i128, b: i128) -> i128 {
    if b == 0 { a } else { gcd128(b, a % b) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn car_diagram_shape() {
        let car = BratteliDiagram::car(6);
        assert_eq!(car.level_count(), 6);
        assert_eq!(car.sizes(1).unwrap(), &[2]);
        assert_eq!(car.sizes(6).unwrap(), &[64]);
        // Unital flag passes the size recursion.
        assert_eq!(car.is_unital(), Some(true));
    }

    #[test]
    fn car_equality_matches_dyadic_rationals() {
        let car = BratteliDiagram::car(14);
        // (2) at level 1 equals (8) at level 3 because 2*2*2 = 8.
        let x = K0Class(vec![2]);
        let y = K0Class(vec![8]);
        assert_eq!(car.k0_equal((1, &x), (3, &y), 8).unwrap(), K0Equality::Equal);
        // Same class at the same level.
        assert_eq!(car.k0_equal((2, &x), (2, &x), 8).unwrap(), K0Equality::Equal);
        // (1) at level 1 vs (1) at level 2: 1 != 1/2 in Z[1/2].
        let one = K0Class(vec![1]);
        assert_eq!(car.k0_equal((1, &one), (2, &one), 8).unwrap(), K0Equality::Distinct);
    }

    #[test]
    fn car_positivity() {
        let car = BratteliDiagram::car(14);
        assert_eq!(
            car.k0_positive((1, &K0Class(vec![0])), 8).unwrap(),
            K0Positivity::Positive
        );
        assert_eq!(
            car.k0_positive((1, &K0Class(vec![-1])), 8).unwrap(),
            K0Positivity::NotPositive
        );
        assert_eq!(
            car.k0_positive((3, &K0Class(vec![5])), 8).unwrap(),
            K0Positivity::Positive
        );
    }

    #[test]
    fn mixed_sign_resolves_through_noninjective_map() {
        // Two blocks collapsing onto one: the map (1 1) is not injective;
        // the class (1, -1) becomes 0 after one step, hence equal to zero
        // and positive.
        let d = BratteliDiagram::new(
            vec![vec![1, 1], vec![2], vec![2]],
            vec![vec![vec![1, 1]], vec![vec![1]]],
            None,
        )
        .unwrap();
        let x = K0Class(vec![1, -1]);
        let zero = K0Class(vec![0, 0]);
        assert_eq!(d.k0_equal((1, &x), (1, &zero), 8).unwrap(), K0Equality::Equal);
        assert_eq!(d.k0_positive((1, &x), 8).unwrap(), K0Positivity::Positive);
    }

    #[test]
    fn undecided_when_horizon_truncates() {
        // A long chain of non-injective maps: with a tiny horizon the query
        // cannot certify distinctness.
        let levels = vec![vec![1, 1]; 12];
        let maps = vec![vec![vec![1, 1], vec![1, 1]]; 11];
        let d = BratteliDiagram::new(levels, maps, None).unwrap();
        let x = K0Class(vec![3, 0]);
        let y = K0Class(vec![0, 2]);
        assert_eq!(d.k0_equal((1, &x), (1, &y), 2).unwrap(), K0Equality::UndecidedAtHorizon);
        // With enough horizon the chain end decides: images are (3,3)... vs
        // (2,2)..., never equal, so distinct at the final level.
        assert_eq!(d.k0_equal((1, &x), (1, &y), 20).unwrap(), K0Equality::Distinct);
        // Mixed-sign positivity below the horizon stays undecided.
        let m = K0Class(vec![1, -2]);
        assert_eq!(d.k0_positive((1, &m), 2).unwrap(), K0Positivity::UndecidedAtHorizon);
        assert_eq!(d.k0_positive((1, &m), 20).unwrap(), K0Positivity::NotPositive);
    }

    #[test]
    fn level_bounds_are_checked() {
        let car = BratteliDiagram::car(3);
        let x = K0Class(vec![1]);
        assert!(matches!(
            car.k0_equal((0, &x), (1, &x), 4),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert!(matches!(
            car.k0_equal((1, &x), (9, &x), 4),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn shape_validation() {
        assert!(BratteliDiagram::new(vec![vec![1]], vec![vec![vec![1]]], None).is_err());
        assert!(BratteliDiagram::new(vec![vec![1], vec![0]], vec![vec![vec![1]]], None).is_err());
        // Unital flag with inconsistent sizes is rejected.
        assert!(BratteliDiagram::new(
            vec![vec![1], vec![3]],
            vec![vec![vec![2]]],
            Some(true)
        )
        .is_err());
    }

    #[test]
    fn injectivity_detection() {
        assert!(integer_matrix_injective(&[vec![2]]));
        assert!(!integer_matrix_injective(&[vec![1, 1]]));
        assert!(integer_matrix_injective(&[vec![1, 0], vec![1, 1]]));
        assert!(!integer_matrix_injective(&[vec![1, 1], vec![2, 2]]));
        assert!(integer_matrix_injective(&[vec![1, 1], vec![0, 1], vec![1, 0]]));
    }

    #[test]
    fn car_exhaustive_grid_against_rational_invariant() {
        // (k at level n) corresponds to k / 2^(n-1); equality in the limit
        // must match equality of these rationals on the full grid.
        let car = BratteliDiagram::car(14);
        for k1 in -16i64..=16 {
            for n1 in 1usize..=6 {
                for k2 in -16i64..=16 {
                    for n2 in 1usize..=6 {
                        let lhs =
                            car.k0_equal((n1, &K0Class(vec![k1])), (n2, &K0Class(vec![k2])), 8)
                                .unwrap();
                        // k1 / 2^(n1-1) = k2 / 2^(n2-1) without division
                        let equal = k1 * (1i64 << (n2 - 1)) == k2 * (1i64 << (n1 - 1));
                        let expect = if equal { K0Equality::Equal } else { K0Equality::Distinct };
                        assert_eq!(lhs, expect, "k1={k1} n1={n1} k2={k2} n2={n2}");
                    }
                }
            }
        }
    }
}
