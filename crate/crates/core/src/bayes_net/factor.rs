use crate::error::{Error, Result};

/// Table over a sorted list of discrete variables, laid out row-major with
/// the last variable varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// Steps `assignment` to the next row-major position. Returns false after
/// the last one.
fn advance(assignment: &mut [usize], cards: &[usize]) -> bool {
    for i in (0..assignment.len()).rev() {
        assignment[i] += 1;
        if assignment[i] < cards[i] {
            return true;
        }
        assignment[i] = 0;
    }
    false
}

impl Factor {
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if vars.len() != cards.len() {
            return Err(Error::InvalidArgument("factor vars and cards differ in length".into()));
        }
        if vars.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("factor vars must be strictly increasing".into()));
        }
        let size: usize = cards.iter().product();
        if values.len() != size {
            return Err(Error::InvalidArgument(format!(
                "factor needs {size} values, got {}",
                values.len()
            )));
        }
        Ok(Factor { vars, cards, values })
    }

    /// The scalar 1.
    pub fn unit() -> Self {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![1.0],
        }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = Vec::with_capacity(self.vars.len() + other.vars.len());
        let mut cards = Vec::with_capacity(vars.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() || j < other.vars.len() {
            let take_self = j >= other.vars.len()
                || (i < self.vars.len() && self.vars[i] <= other.vars[j]);
            if take_self {
                if j < other.vars.len() && self.vars[i] == other.vars[j] {
                    j += 1;
                }
                vars.push(self.vars[i]);
                cards.push(self.cards[i]);
                i += 1;
            } else {
                vars.push(other.vars[j]);
                cards.push(other.cards[j]);
                j += 1;
            }
        }
        let stride_in = |f: &Factor| {
            let own = strides(&f.cards);
            vars.iter()
                .map(|v| f.vars.iter().position(|x| x == v).map_or(0, |k| own[k]))
                .collect::<Vec<_>>()
        };
        let sa = stride_in(self);
        let sb = stride_in(other);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        loop {
            values.push(self.values[ia] * other.values[ib]);
            // incremental index update mirroring `advance`
            let mut k = vars.len();
            loop {
                if k == 0 {
                    return Factor { vars, cards, values };
                }
                k -= 1;
                assignment[k] += 1;
                ia += sa[k];
                ib += sb[k];
                if assignment[k] < cards[k] {
                    break;
                }
                ia -= sa[k] * cards[k];
                ib -= sb[k] * cards[k];
                assignment[k] = 0;
            }
        }
    }

    /// Sums out every variable not in `keep`.
    pub fn marginalize_to(&self, keep: &[usize]) -> Factor {
        let mut vars = Vec::new();
        let mut cards = Vec::new();
        for (v, c) in self.vars.iter().zip(&self.cards) {
            if keep.contains(v) {
                vars.push(*v);
                cards.push(*c);
            }
        }
        let out_strides = strides(&cards);
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|x| x == v).map_or(0, |k| out_strides[k]))
            .collect();
        let mut values = vec![0.0; cards.iter().product()];
        let mut assignment = vec![0; self.vars.len()];
        let mut pos = 0;
        loop {
            let target: usize = assignment.iter().zip(&map).map(|(a, s)| a * s).sum();
            values[target] += self.values[pos];
            pos += 1;
            if !advance(&mut assignment, &self.cards) {
                break;
            }
        }
        Factor { vars, cards, values }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Scales the table to sum to one and returns the old sum.
    pub fn normalize(&mut self) -> Result<f64> {
        let total = self.sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::InconsistentEvidence);
        }
        for v in &mut self.values {
            *v /= total;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_aligns_shared_variables() {
        // f(a, b) * g(b, c), all binary
        let f = Factor::new(vec![0, 1], vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = Factor::new(vec![1, 2], vec![2, 2], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let h = f.product(&g);
        assert_eq!(h.vars(), &[0, 1, 2]);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let want = f.values[a * 2 + b] * g.values[b * 2 + c];
                    assert_eq!(h.values[a * 4 + b * 2 + c], want);
                }
            }
        }
    }

    #[test]
    fn product_with_disjoint_and_unit() {
        let f = Factor::new(vec![3], vec![3], vec![1.0, 2.0, 3.0]).unwrap();
        let g = Factor::new(vec![1], vec![2], vec![10.0, 20.0]).unwrap();
        let h = f.product(&g);
        assert_eq!(h.vars(), &[1, 3]);
        assert_eq!(h.values(), &[10.0, 20.0, 30.0, 20.0, 40.0, 60.0]);
        assert_eq!(Factor::unit().product(&f), f);
    }

    #[test]
    fn marginalize_sums_out() {
        let f = Factor::new(vec![0, 1], vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(f.marginalize_to(&[0]).values(), &[6.0, 15.0]);
        assert_eq!(f.marginalize_to(&[1]).values(), &[5.0, 7.0, 9.0]);
        assert_eq!(f.marginalize_to(&[]).values(), &[21.0]);
        assert_eq!(f.marginalize_to(&[0, 1]), f);
    }

    #[test]
    fn normalize_rejects_zero_mass() {
        let mut f = Factor::new(vec![0], vec![2], vec![0.0, 0.0]).unwrap();
        assert!(matches!(f.normalize(), Err(Error::InconsistentEvidence)));
        let mut g = Factor::new(vec![0], vec![2], vec![1.0, 3.0]).unwrap();
        assert_eq!(g.normalize().unwrap(), 4.0);
        assert_eq!(g.values(), &[0.25, 0.75]);
    }

    #[test]
    fn constructor_validates() {
        assert!(Factor::new(vec![1, 0], vec![2, 2], vec![0.0; 4]).is_err());
        assert!(Factor::new(vec![0], vec![2], vec![0.0; 3]).is_err());
    }
}
