/// Enumerate the train/test runs of the temporal-robustness harness: train
/// on one period, test on every later one.
///
/// For `k` periods this yields `k * (k - 1) / 2` ordered `(train, test)`
/// pairs.
pub fn temporal_splits(periods: usize) -> Vec<(usize, usize)> {
    let mut splits = Vec::with_capacity(periods.saturating_sub(1) * periods / 2);
    for train in 0..periods {
        for test in train + 1..periods {
            splits.push((train, test));
        }
    }
    splits
}
