/// Shannon entropy in bits of a count vector.
pub(crate) fn entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in counts {
        if c > 0.0 {
            let p = c / total;
            h -= p * p.log2();
        }
    }
    h
}

pub(crate) fn distinct_classes(counts: &[f64]) -> usize {
    counts.iter().filter(|&&c| c > 0.0).count()
}
