use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::ReducedMemory;
use crate::pal::{pal_eval_staircase, HalfPlaneGrid, TriangularMeasure};

use super::ast::{CmpOp, Efo, Operand};

/// Which corners a band head detects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    /// A stored maximum in `[alpha_i, alpha_{i+1})`.
    Max,
    /// A stored minimum in `(beta_j, beta_{j+1}]`.
    Min,
}

/// One head of a compiled aggregate: a band detector and its readout weight.
#[derive(Debug, Clone, PartialEq)]
pub struct BandHead {
    pub band: Band,
    /// 1-based grid index of the band's lower node.
    pub node: usize,
    /// Value the band stands for (its midpoint).
    pub representative: f64,
    pub weight: f64,
    pub measure: TriangularMeasure<f64>,
}

/// `ExtAgg` compiled to a bank of PAL heads with a clamped rectifier readout:
/// `sum_h weight_h * (relu(y_h) - relu(y_h - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtAggBank {
    pub grid: HalfPlaneGrid<f64>,
    pub heads: Vec<BandHead>,
}

impl ExtAggBank {
    pub fn evaluate(&self, rm: &ReducedMemory<f64>) -> f64 {
        self.heads
            .iter()
            .map(|h| {
                let y = pal_eval_staircase(&h.measure, rm);
                h.weight * (y.max(0.0) - (y - 1.0).max(0.0))
            })
            .sum()
    }

    pub fn evaluate_signal(&self, u: &[f64]) -> f64 {
        let mut rm = ReducedMemory::new();
        for &x in u {
            rm.update(x);
        }
        self.evaluate(&rm)
    }
}

/// Closed interval of values accepted by a condition on the aggregated
/// variable alone.
fn condition_interval(cond: &Efo, var: &str) -> Result<(f64, f64)> {
    match cond {
        Efo::True => Ok((f64::NEG_INFINITY, f64::INFINITY)),
        Efo::False => Ok((f64::INFINITY, f64::NEG_INFINITY)),
        Efo::Cmp {
            var: v,
            op,
            rhs: Operand::Const(c),
        } if v == var => Ok(match op {
            CmpOp::Ge => (*c, f64::INFINITY),
            CmpOp::Le => (f64::NEG_INFINITY, *c),
        }),
        Efo::And(a, b) => {
            let (l1, h1) = condition_interval(a, var)?;
            let (l2, h2) = condition_interval(b, var)?;
            Ok((l1.max(l2), h1.min(h2)))
        }
        other => Err(Error::Unsupported(format!(
            "only conjunctions of threshold atoms on '{var}' compile to heads, got {other}"
        ))),
    }
}

/// Compiles `extagg v [f] where cond` to band heads on `grid`.
///
/// Exact (up to replacing each corner by its band midpoint) on histories
/// whose extremal positions are all still stored, with consecutive stored
/// extrema more than one grid step apart and all values inside the grid.
pub fn compile_extagg(e: &Efo, grid: &HalfPlaneGrid<f64>) -> Result<ExtAggBank> {
    let Efo::ExtAgg { var, f, cond } = e else {
        return Err(Error::Unsupported(
            "only a single aggregate compiles to heads".into(),
        ));
    };
    let (lo, hi) = condition_interval(cond, var)?;
    let g = |x: f64| {
        if (lo..=hi).contains(&x) {
            f.apply(x)
        } else {
            0.0
        }
    };
    let l = grid.side();
    let half = grid.delta() / 2.0;
    let mut heads = Vec::new();
    for i in 1..=l {
        let rep = grid.node(i) + half;
        let weight = g(rep);
        if weight == 0.0 {
            continue;
        }
        let measure = TriangularMeasure::from_fn(grid.clone(), |a, b| {
            if a == i {
                1.0
            } else if a == i + 1 && b <= i {
                -1.0
            } else {
                0.0
            }
        });
        heads.push(BandHead {
            band: Band::Max,
            node: i,
            representative: rep,
            weight,
            measure,
        });
    }
    for j in 1..l {
        let rep = grid.node(j) + half;
        let weight = g(rep);
        if weight == 0.0 {
            continue;
        }
        let measure = TriangularMeasure::from_fn(grid.clone(), |a, b| {
            if a > j && b == j {
                1.0
            } else if a > j && b == j + 1 {
                -1.0
            } else {
                0.0
            }
        });
        heads.push(BandHead {
            band: Band::Min,
            node: j,
            representative: rep,
            weight,
            measure,
        });
    }
    Ok(ExtAggBank {
        grid: grid.clone(),
        heads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efo::eval::eval_real;
    use crate::efo::parser::parse_efo;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Nested history `M0 > M1 > ... > m_k > ... > m1`, starting at the top
    /// and alternating down/up, with monotone filler between corners.
    fn nested_signal(rng: &mut ChaCha8Rng, gap: f64) -> Vec<f64> {
        let k = rng.gen_range(2..=8);
        let values = loop {
            let mut v: Vec<f64> = (0..k).map(|_| rng.gen_range(-4.0..4.0)).collect();
            v.sort_by(f64::total_cmp);
            if v.windows(2).all(|w| w[1] - w[0] > gap) {
                break v;
            }
        };
        let mut corners = Vec::with_capacity(k);
        let (mut a, mut b) = (0, k - 1);
        for t in 0..k {
            if t % 2 == 0 {
                corners.push(values[b]);
                b = b.wrapping_sub(1);
            } else {
                corners.push(values[a]);
                a += 1;
            }
        }
        let mut u = vec![corners[0]];
        for w in corners.windows(2) {
            u.push(w[0] + 0.5 * (w[1] - w[0]));
            u.push(w[1]);
        }
        u
    }

    #[test]
    fn count_matches_on_nested_histories() {
        let grid = HalfPlaneGrid::new(40, 0.25, -5.0).unwrap();
        let e = parse_efo("extagg i [1] where true").unwrap();
        let bank = compile_extagg(&e, &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let u = nested_signal(&mut rng, 0.6);
            assert_eq!(
                bank.evaluate_signal(&u),
                eval_real(&e, &u).unwrap(),
                "{u:?}"
            );
        }
    }

    #[test]
    fn affine_aggregate_within_resolution() {
        let grid = HalfPlaneGrid::new(40, 0.25, -5.0).unwrap();
        let e = parse_efo("extagg i [2 * u[i] - 1] where true").unwrap();
        let bank = compile_extagg(&e, &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let u = nested_signal(&mut rng, 0.6);
            let want = eval_real(&e, &u).unwrap();
            let count = eval_real(&parse_efo("extagg i [1] where true").unwrap(), &u).unwrap();
            assert!((bank.evaluate_signal(&u) - want).abs() <= count * 0.25 + 1e-9);
        }
    }

    #[test]
    fn empty_condition_gives_no_heads() {
        let grid = HalfPlaneGrid::new(10, 1.0, 0.0).unwrap();
        let bank = compile_extagg(&parse_efo("extagg i [0] where true").unwrap(), &grid).unwrap();
        assert!(bank.heads.is_empty());
        let bank = compile_extagg(
            &parse_efo("extagg i [1] where (u[i] >= 5 & u[i] <= 2)").unwrap(),
            &grid,
        )
        .unwrap();
        assert!(bank.heads.is_empty());
    }

    #[test]
    fn unsupported_shapes() {
        let grid = HalfPlaneGrid::new(10, 1.0, 0.0).unwrap();
        for src in [
            "extagg i [1] where (u[i] >= 1 | u[i] <= 0)",
            "true",
            "extagg i [1] where true + extagg i [1] where true",
        ] {
            assert!(
                matches!(
                    compile_extagg(&parse_efo(src).unwrap(), &grid),
                    Err(Error::Unsupported(_))
                ),
                "{src}"
            );
        }
    }
}
