//! Minimal subsets of weighted items whose total weight reaches a threshold.
//!
//! For a monotone width-1 quantifier with threshold `t` at some degree, the
//! accepted unions of neighbor colors are exactly the supersets of these
//! minimal subsets, so the antichain is a complete description.

/// Steps between two calls of the `tick` hook.
pub const TICK_INTERVAL: u64 = 2048;

/// Calls `visit` with every inclusion-minimal set of indices whose weights
/// sum to at least `threshold`, in lexicographic order of the index lists.
/// `tick` is called every [`TICK_INTERVAL`] search steps and may abort the
/// enumeration by returning an error.
pub fn for_each_minimal<E>(
    weights: &[u64],
    threshold: u64,
    mut tick: impl FnMut() -> Result<(), E>,
    mut visit: impl FnMut(&[usize]) -> Result<(), E>,
) -> Result<(), E> {
    if threshold == 0 {
        return visit(&[]);
    }
    let mut suffix = vec![0u64; weights.len() + 1];
    for i in (0..weights.len()).rev() {
        suffix[i] = suffix[i + 1] + weights[i];
    }
    if suffix[0] < threshold {
        return Ok(());
    }
    let mut search = Search {
        weights,
        threshold,
        suffix,
        chosen: Vec::new(),
        steps: 0,
        tick: &mut tick,
        visit: &mut visit,
    };
    search.descend(0, 0, u64::MAX)
}

struct Search<'a, E> {
    weights: &'a [u64],
    threshold: u64,
    suffix: Vec<u64>,
    chosen: Vec<usize>,
    steps: u64,
    tick: &'a mut dyn FnMut() -> Result<(), E>,
    visit: &'a mut dyn FnMut(&[usize]) -> Result<(), E>,
}

impl<E> Search<'_, E> {
    fn descend(&mut self, i: usize, sum: u64, lightest: u64) -> Result<(), E> {
        self.steps += 1;
        if self.steps.is_multiple_of(TICK_INTERVAL) {
            (self.tick)()?;
        }
        if sum >= self.threshold {
            if sum - lightest < self.threshold {
                (self.visit)(&self.chosen)?;
            }
            return Ok(());
        }
        if i == self.weights.len() || sum + self.suffix[i] < self.threshold {
            return Ok(());
        }
        let w = self.weights[i];
        self.chosen.push(i);
        self.descend(i + 1, sum + w, lightest.min(w))?;
        self.chosen.pop();
        self.descend(i + 1, sum, lightest)
    }
}

/// Collects [`for_each_minimal`] without a time limit.
pub fn minimal_subsets(weights: &[u64], threshold: u64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_minimal::<()>(weights, threshold, || Ok(()), |s| {
        out.push(s.to_vec());
        Ok(())
    })
    .expect("infallible");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(weights: &[u64], t: u64) -> Vec<Vec<usize>> {
        let m = weights.len();
        let sum = |mask: u32| (0..m).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum::<u64>();
        let mut out: Vec<Vec<usize>> = (0..1u32 << m)
            .filter(|&mask| sum(mask) >= t && (0..m).all(|i| mask >> i & 1 == 0 || sum(mask & !(1 << i)) < t))
            .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).collect())
            .collect();
        out.sort();
        out
    }

    #[test]
    fn majority_example() {
        // multiplicities a:2, b:1, c:1 at degree 4, strict majority needs 3
        assert_eq!(minimal_subsets(&[2, 1, 1], 3), vec![vec![0, 1], vec![0, 2]]);
        assert_eq!(minimal_subsets(&[3], 2), vec![vec![0]]);
        assert_eq!(minimal_subsets(&[1, 1], 0), vec![Vec::<usize>::new()]);
        assert!(minimal_subsets(&[1, 1], 3).is_empty());
    }

    #[test]
    fn tick_can_abort() {
        let weights = vec![1u64; 40];
        let r = for_each_minimal(&weights, 21, || Err("stop"), |_| Ok(()));
        assert_eq!(r, Err("stop"));
    }

    proptest! {
        #[test]
        fn matches_brute_force(weights in prop::collection::vec(1u64..5, 0..10), t in 0u64..15) {
            prop_assert_eq!(minimal_subsets(&weights, t), brute(&weights, t));
        }
    }
}
