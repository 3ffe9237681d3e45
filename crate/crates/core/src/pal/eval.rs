use crate::memory::ReducedMemory;
use crate::relay::RelayThresholds;
use crate::scalar::Scalar;

use super::grid::TriangularMeasure;

/// Sum over every cell of `mu_ij * relay(alpha_i, beta_j)`, each relay read
/// from the reduced memory. `O(L^2 log r)`.
pub fn pal_eval_naive<T: Scalar>(m: &TriangularMeasure<T>, rm: &ReducedMemory<T>) -> T {
    let g = m.grid();
    let mut acc = T::zero();
    for (i, j) in g.cells() {
        let w = m.weight(i, j);
        if w.is_zero() {
            continue;
        }
        let th = RelayThresholds::new(g.node(i).clone(), g.node(j).clone())
            .expect("grid cell has i >= j");
        if rm.relay_read(&th).is_on() {
            acc = acc + w.clone();
        }
    }
    acc
}

/// Index box in the grid, 1-based and inclusive.
#[derive(Debug, Clone, Copy)]
struct IndexBox {
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
}

impl IndexBox {
    fn full(side: usize) -> Self {
        Self {
            i0: 1,
            i1: side,
            j0: 1,
            j1: side,
        }
    }
}

/// Measure of the ON region inside `clip`.
///
/// Walking the corners backwards, corner `t` decides every relay not yet
/// decided by a later corner; it switches ON exactly the cells with
/// `alpha in (max_{s>t} c_s, c_t]` and `beta < min_{s>t} c_s`. Each such
/// region is a rectangle, summed from the prefix table.
fn staircase_sum<T: Scalar>(m: &TriangularMeasure<T>, corners: &[T], clip: IndexBox) -> T {
    let g = m.grid();
    let mut acc = T::zero();
    // Index bounds of the undecided region: alpha index > i_floor, beta index <= j_ceil.
    let mut i_floor = 0usize;
    let mut j_ceil = g.side();
    let mut later_max: Option<&T> = None;
    let mut later_min: Option<&T> = None;
    for c in corners.iter().rev() {
        if later_max.is_none_or(|mx| c > mx) {
            let i_top = g.count_le(c);
            if i_top > i_floor {
                acc = acc
                    + m.rect_sum(
                        (i_floor + 1).max(clip.i0),
                        i_top.min(clip.i1),
                        clip.j0,
                        j_ceil.min(clip.j1),
                    );
            }
            i_floor = i_floor.max(i_top);
            later_max = Some(c);
        }
        if later_min.is_none_or(|mn| c < mn) {
            j_ceil = j_ceil.min(g.count_lt(c));
            later_min = Some(c);
        }
        if i_floor >= g.side() || j_ceil == 0 {
            break;
        }
    }
    acc
}

/// Integrates the measure over the ON region of the staircase with 2D prefix
/// sums: `O(r log L)` per query.
pub fn pal_eval_staircase<T: Scalar>(m: &TriangularMeasure<T>, rm: &ReducedMemory<T>) -> T {
    staircase_sum(m, rm.corners(), IndexBox::full(m.grid().side()))
}

/// PAL value after feeding `u_next` to `rm_before`, given the cached value for
/// `rm_before`. Only the strip of cells that can flip is integrated.
///
/// `cached` must equal `pal_eval_staircase(m, rm_before)`; debug builds check it.
pub fn pal_eval_incremental<T: Scalar>(
    m: &TriangularMeasure<T>,
    rm_before: &ReducedMemory<T>,
    u_next: &T,
    cached: &T,
) -> T {
    debug_assert!(
        {
            let fresh = pal_eval_staircase(m, rm_before);
            let tol = T::from_f64(1e-9) * (m.total_abs() + T::one());
            (fresh - cached.clone()).abs_val() <= tol
        },
        "stale PAL cache"
    );
    let g = m.grid();
    let side = g.side();
    let Some(last) = rm_before.last() else {
        // Empty history: every relay is off, so the value is the staircase of [u].
        let mut rm = ReducedMemory::new();
        rm.update(u_next.clone());
        return pal_eval_staircase(m, &rm);
    };
    if u_next == last {
        return cached.clone();
    }
    let corners = rm_before.corners();
    if u_next > last {
        // Relays with alpha in (last, u_next] switch on.
        let strip = IndexBox {
            i0: g.count_le(last) + 1,
            i1: g.count_le(u_next),
            j0: 1,
            j1: side,
        };
        if strip.i0 > strip.i1 {
            return cached.clone();
        }
        let strip_total = m.rect_sum(strip.i0, strip.i1, 1, side);
        let strip_on = staircase_sum(m, corners, strip);
        cached.clone() + strip_total - strip_on
    } else {
        // Relays with beta in [u_next, last] that are on switch off, except
        // the one with alpha == beta == u_next, where the on test wins.
        let strip = IndexBox {
            i0: g.count_le(u_next) + 1,
            i1: side,
            j0: g.count_lt(u_next) + 1,
            j1: g.count_le(last),
        };
        if strip.j0 > strip.j1 {
            return cached.clone();
        }
        cached.clone() - staircase_sum(m, corners, strip)
    }
}

/// Streaming evaluator that keeps the reduced memory and the cached value.
#[derive(Debug, Clone)]
pub struct IncrementalPal<'m, T: Scalar = f64> {
    measure: &'m TriangularMeasure<T>,
    rm: ReducedMemory<T>,
    value: T,
}

impl<'m, T: Scalar> IncrementalPal<'m, T> {
    pub fn new(measure: &'m TriangularMeasure<T>) -> Self {
        Self {
            measure,
            rm: ReducedMemory::new(),
            value: T::zero(),
        }
    }

    pub fn push(&mut self, u: T) -> &T {
        self.value = pal_eval_incremental(self.measure, &self.rm, &u, &self.value);
        self.rm.update(u);
        &self.value
    }

    pub fn value(&self) -> &T {
        &self.value
    }

    pub fn memory(&self) -> &ReducedMemory<T> {
        &self.rm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pal::grid::HalfPlaneGrid;
    use crate::scalar::{ratio, Rational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(l: usize, d: f64, o: f64) -> HalfPlaneGrid {
        HalfPlaneGrid::new(l, d, o).unwrap()
    }

    fn rm(xs: &[f64]) -> ReducedMemory {
        ReducedMemory::from_samples(xs)
    }

    #[test]
    fn single_atom() {
        // alpha = 1, beta = -1 on a grid with origin -3, delta 1: i = 4, j = 2.
        let g = grid(6, 1.0, -3.0);
        assert_eq!((*g.node(4), *g.node(2)), (1.0, -1.0));
        let m = TriangularMeasure::from_cells(g, [(4, 2, 2.5)]).unwrap();
        let h = rm(&[0.0, 2.0]);
        assert_eq!(pal_eval_naive(&m, &h), 2.5);
        assert_eq!(pal_eval_staircase(&m, &h), 2.5);
    }

    #[test]
    fn zero_measure() {
        let m = TriangularMeasure::zeros(grid(5, 1.0, 0.0));
        let h = rm(&[0.0, 3.0, 1.0]);
        assert_eq!(pal_eval_naive(&m, &h), 0.0);
        assert_eq!(pal_eval_staircase(&m, &h), 0.0);
    }

    #[test]
    fn unit_measure_cell_count() {
        // Brute force: cells with alpha_i <= 3.5 are i in {1,2,3}: 1 + 2 + 3 = 6.
        let g = grid(4, 1.0, 0.0);
        let brute = g.cells().filter(|&(i, _)| *g.node(i) <= 3.5).count() as f64;
        assert_eq!(brute, 6.0);
        let m = TriangularMeasure::from_fn(g, |_, _| 1.0);
        let h = rm(&[0.0, 3.5]);
        assert_eq!(pal_eval_naive(&m, &h), brute);
        assert_eq!(pal_eval_staircase(&m, &h), brute);
    }

    #[test]
    fn empty_history_and_saturation() {
        let m = TriangularMeasure::from_fn(grid(4, 1.0, 0.0), |_, _| 1.0);
        assert_eq!(pal_eval_staircase(&m, &ReducedMemory::new()), 0.0);
        assert_eq!(pal_eval_staircase(&m, &rm(&[0.0, 10.0])), 10.0);
    }

    #[test]
    fn incremental_plateau_and_saturation() {
        let m = TriangularMeasure::from_fn(grid(4, 1.0, 0.0), |i, j| (i + j) as f64);
        let mut inc = IncrementalPal::new(&m);
        inc.push(0.5);
        inc.push(2.5);
        let v = *inc.value();
        assert_eq!(*inc.push(2.5), v);
        assert_eq!(*inc.push(100.0), m.total());
    }

    #[test]
    fn three_paths_agree_on_random_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let l = rng.gen_range(1..12);
            let g = grid(l, 0.5, -3.0);
            let m = TriangularMeasure::from_fn(g, |_, _| rng.gen_range(-4..=4) as f64 / 4.0);
            let mut inc = IncrementalPal::new(&m);
            let mut x = 0.0f64;
            for _ in 0..60 {
                x += rng.gen_range(-4..=4) as f64 / 4.0;
                let before = inc.memory().corners().to_vec();
                let v = *inc.push(x);
                assert_eq!(
                    v,
                    pal_eval_staircase(&m, inc.memory()),
                    "{before:?} -> {x} l={l}"
                );
                assert_eq!(v, pal_eval_naive(&m, inc.memory()));
            }
        }
    }

    #[test]
    fn rational_mode_exact() {
        let g = HalfPlaneGrid::new(6, ratio(1, 3), ratio(-1, 1)).unwrap();
        let m: TriangularMeasure<Rational> =
            TriangularMeasure::from_fn(g, |i, j| ratio(i as i64 - 2 * j as i64, 7));
        let mut inc = IncrementalPal::new(&m);
        for x in [0, 1, -1, 3, 2, 5, -2, 4].map(|k| ratio(k, 5)) {
            let v = inc.push(x).clone();
            assert_eq!(v, pal_eval_naive(&m, inc.memory()));
        }
    }
}
