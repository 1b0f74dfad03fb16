//! Deterministic train / validation / test partitions.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::AudioSampleRef;
use crate::error::{Error, Result};
use crate::rng;

/// Sizes summing to `n`, proportional to `fractions` (largest-remainder rounding,
/// ties to the earlier part).
pub fn largest_remainder(n: usize, fractions: &[f64]) -> Result<Vec<usize>> {
    if fractions.is_empty() || fractions.iter().any(|f| !(*f >= 0.0 && f.is_finite())) {
        return Err(Error::config("split fractions must be finite and >= 0"));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!("split fractions sum to {total}, expected 1")));
    }
    let quotas: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let left = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().take(left) {
        sizes[i] += 1;
    }
    Ok(sizes)
}

/// Shuffles `items` under `seed` and cuts them into consecutive parts.
pub fn split<T: Clone>(items: &[T], fractions: &[f64], seed: u64) -> Result<Vec<Vec<T>>> {
    let sizes = largest_remainder(items.len(), fractions)?;
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(&mut rng::stream(seed, &[rng::tag("split")]));
    let mut out = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for s in sizes {
        let mut part: Vec<usize> = idx[at..at + s].to_vec();
        part.sort_unstable();
        out.push(part.into_iter().map(|i| items[i].clone()).collect());
        at += s;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.2,
            test: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplits {
    pub train: Vec<AudioSampleRef>,
    pub validation: Vec<AudioSampleRef>,
    pub test: Vec<AudioSampleRef>,
}

/// Test takes whole scenarios (a held-out recording); the remaining windows
/// are split between train and validation sample by sample.
pub fn split_refs(refs: &[AudioSampleRef], fr: &SplitFractions, seed: u64) -> Result<DatasetSplits> {
    largest_remainder(0, &[fr.train, fr.validation, fr.test])?;
    let scenarios: Vec<String> = refs.iter().map(|r| r.scenario.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let parts = split(&scenarios, &[1.0 - fr.test, fr.test], rng::key(seed, &[rng::tag("test-scenarios")]))?;
    let test_set: BTreeSet<&String> = parts[1].iter().collect();
    let (test, rest): (Vec<_>, Vec<_>) = refs.iter().cloned().partition(|r| test_set.contains(&r.scenario));
    let tv = fr.train + fr.validation;
    let (train, validation) = if rest.is_empty() || tv <= 0.0 {
        (Vec::new(), rest)
    } else {
        let mut p = split(&rest, &[fr.train / tv, fr.validation / tv], seed)?;
        let v = p.pop().unwrap_or_default();
        (p.pop().unwrap_or_default(), v)
    };
    Ok(DatasetSplits { train, validation, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::AudioLabel;
    use proptest::prelude::*;

    fn refs(scenarios: usize, per: usize) -> Vec<AudioSampleRef> {
        (0..scenarios * per)
            .map(|i| AudioSampleRef {
                scenario: format!("s{}", i / per),
                channel_file: "audio/ch_0.wav".into(),
                channel: 0,
                mic_id: 0,
                center_time: (i % per) as f64,
                label: if i % 2 == 0 { AudioLabel::Foreground } else { AudioLabel::Background },
            })
            .collect()
    }

    #[test]
    fn examples() {
        let items: Vec<u32> = (0..10).collect();
        let one = split(&items, &[1.0], 3).unwrap();
        assert_eq!(one, vec![items.clone()]);
        let p = split(&items, &[0.8, 0.2], 3).unwrap();
        assert_eq!((p[0].len(), p[1].len()), (8, 2));
        assert_eq!(p, split(&items, &[0.8, 0.2], 3).unwrap());
        assert_eq!(largest_remainder(10, &[1.0 / 3.0; 3]).unwrap(), [4, 3, 3]);
        assert_eq!(largest_remainder(7, &[0.5, 0.25, 0.25]).unwrap(), [3, 2, 2]);
        assert!(largest_remainder(10, &[0.5, 0.4]).is_err());
    }

    proptest! {
        #[test]
        fn test_scenarios_are_disjoint(n_s in 1usize..8, per in 1usize..20, test in 0.0f64..0.6, seed: u64) {
            let r = refs(n_s, per);
            let fr = SplitFractions { train: (1.0 - test) * 0.8, validation: (1.0 - test) * 0.2, test };
            let s = split_refs(&r, &fr, seed).unwrap();
            prop_assert_eq!(s.train.len() + s.validation.len() + s.test.len(), r.len());
            let test_ids: BTreeSet<_> = s.test.iter().map(|x| &x.scenario).collect();
            prop_assert!(s.train.iter().chain(&s.validation).all(|x| !test_ids.contains(&x.scenario)));
            prop_assert_eq!(s.clone(), split_refs(&r, &fr, seed).unwrap());
        }
    }
}
