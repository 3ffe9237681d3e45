use crate::error::{Error, Result};
use crate::memory::ReducedMemory;

/// Running sum of the values that no later value strictly exceeds.
///
/// Kept as a non-increasing stack: a new value pops every strictly smaller
/// entry, so each value is pushed and popped at most once.
pub fn streaming_non_dominated_sum(stream: &[f64]) -> Vec<f64> {
    let mut stack: Vec<f64> = Vec::new();
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(stream.len());
    for &x in stream {
        while let Some(&top) = stack.last() {
            if top < x {
                sum -= top;
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(x);
        sum += x;
        out.push(sum);
    }
    out
}

/// Patterns kept by an extremum stack over their strengths.
#[derive(Debug, Clone)]
pub struct PatternStore {
    patterns: Vec<Vec<f64>>,
    strengths: Vec<f64>,
    memory: ReducedMemory<f64>,
    /// Surviving `(strength, pattern index)`, sorted by strength.
    index: Vec<(f64, usize)>,
}

impl PatternStore {
    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn memory(&self) -> &ReducedMemory<f64> {
        &self.memory
    }

    /// Indices of surviving patterns in arrival order.
    pub fn survivors(&self) -> Vec<usize> {
        self.memory.positions().to_vec()
    }

    pub fn capacity(&self) -> usize {
        self.memory.len()
    }

    pub fn pattern(&self, i: usize) -> &[f64] {
        &self.patterns[i]
    }
}

/// Feeds the 2-norms of `patterns` into an extremum stack.
pub fn hopfield_store(patterns: Vec<Vec<f64>>) -> Result<PatternStore> {
    let strengths: Vec<f64> = patterns
        .iter()
        .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut sorted = strengths.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSpec(
            "pattern strengths must be distinct".into(),
        ));
    }
    let memory = ReducedMemory::from_samples(&strengths);
    let mut index: Vec<(f64, usize)> = memory
        .positions()
        .iter()
        .map(|&t| (strengths[t], t))
        .collect();
    index.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PatternStore {
        patterns,
        strengths,
        memory,
        index,
    })
}

/// Pattern whose stored strength is within `tol` of `query`, found by binary
/// search over the surviving strengths.
pub fn hopfield_retrieve(store: &PatternStore, query: f64, tol: f64) -> Result<&[f64]> {
    let at = store.index.partition_point(|&(s, _)| s < query);
    let nearest = [at.checked_sub(1), Some(at)]
        .into_iter()
        .flatten()
        .filter_map(|k| store.index.get(k))
        .min_by(|a, b| (a.0 - query).abs().total_cmp(&(b.0 - query).abs()));
    match nearest {
        Some(&(s, i)) if (s - query).abs() <= tol => Ok(&store.patterns[i]),
        _ => Err(Error::NotFound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(stream: &[f64]) -> Vec<f64> {
        (0..stream.len())
            .map(|n| {
                (0..=n)
                    .filter(|&t| stream[t + 1..=n].iter().all(|&y| y <= stream[t]))
                    .map(|t| stream[t])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn examples() {
        assert_eq!(
            streaming_non_dominated_sum(&[3.0, 1.0, 2.0]),
            vec![3.0, 4.0, 5.0]
        );
        assert_eq!(
            *streaming_non_dominated_sum(&[1.0, 2.0, 3.0])
                .last()
                .unwrap(),
            3.0
        );
        assert_eq!(
            *streaming_non_dominated_sum(&[3.0, 2.0, 1.0])
                .last()
                .unwrap(),
            6.0
        );
        assert_eq!(streaming_non_dominated_sum(&[2.0, 2.0]), vec![2.0, 4.0]);
    }

    #[test]
    fn matches_suffix_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let n = rng.gen_range(0..40);
            let s: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(-20..20))).collect();
            assert_eq!(streaming_non_dominated_sum(&s), brute_force(&s), "{s:?}");
        }
    }

    fn scaled(strengths: &[f64]) -> Vec<Vec<f64>> {
        strengths.iter().map(|&s| vec![0.6 * s, 0.8 * s]).collect()
    }

    #[test]
    fn store_and_retrieve() {
        let store = hopfield_store(scaled(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(store.survivors(), vec![0, 1, 2]);
        let p = hopfield_retrieve(&store, 3.0, 1e-9).unwrap();
        assert!((p[0] - 1.8).abs() < 1e-12);
        assert!(matches!(
            hopfield_retrieve(&store, 2.5, 0.1),
            Err(Error::NotFound)
        ));

        let one = hopfield_store(scaled(&[4.0])).unwrap();
        assert_eq!(one.survivors(), vec![0]);
        assert!(hopfield_retrieve(&one, 4.0, 1e-9).is_ok());

        let rising = hopfield_store(scaled(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(rising.survivors(), vec![0, 3]);
        assert!(matches!(
            hopfield_retrieve(&rising, 2.0, 1e-6),
            Err(Error::NotFound)
        ));

        assert!(hopfield_store(scaled(&[1.0, 1.0])).is_err());
    }

    fn local_extrema(u: &[f64]) -> Vec<usize> {
        let n = u.len();
        (0..n)
            .filter(|&t| t == 0 || t + 1 == n || (u[t] - u[t - 1]) * (u[t + 1] - u[t]) < 0.0)
            .collect()
    }

    /// Backward scan keeping alternating suffix records; a run of records of
    /// one kind collapses to the oldest.
    fn suffix_records(u: &[f64]) -> Vec<usize> {
        let n = u.len();
        let (mut hi, mut lo) = (u[n - 1], u[n - 1]);
        let mut recs: Vec<(usize, i8)> = vec![(n - 1, 0)];
        for t in (0..n - 1).rev() {
            let kind = if u[t] > hi {
                hi = u[t];
                1
            } else if u[t] < lo {
                lo = u[t];
                -1
            } else {
                continue;
            };
            match recs.last_mut() {
                Some(last) if last.1 == kind => last.0 = t,
                _ => recs.push((t, kind)),
            }
        }
        recs.iter().rev().map(|r| r.0).collect()
    }

    #[test]
    fn survivors_match_extremum_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let n = rng.gen_range(1..30);
            let mut s: Vec<f64> = (0..n)
                .map(|t| f64::from(rng.gen_range(1..1000)) + t as f64 * 1e-4)
                .collect();
            s.dedup();
            let store = hopfield_store(scaled(&s)).unwrap();
            let kept = store.survivors();
            let ext = local_extrema(store.strengths());
            assert!(kept.iter().all(|t| ext.contains(t)), "{s:?}");
            assert!(kept.len() <= ext.len());
            let recs = suffix_records(store.strengths());
            assert!(
                kept == recs || kept == recs[1..],
                "{s:?}: {kept:?} vs {recs:?}"
            );
            for &t in &kept {
                let p = hopfield_retrieve(&store, store.strengths()[t], 1e-9).unwrap();
                assert_eq!(p, store.pattern(t));
            }
        }
    }
}
