use crate::population::{summarize, Population, TrajectoryRecord};

/// Dense occupancy counts over the window `[base, base + counts.len())`.
/// Both end cells are always occupied; interior cells may be zero.
#[derive(Debug, Clone)]
pub(crate) struct Histogram {
    base: i64,
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn from_population(p: &Population) -> Self {
        let base = p.min_class();
        let mut counts = vec![0u64; (p.max_class() - base + 1) as usize];
        for (k, c) in p.iter() {
            counts[(k - base) as usize] = c;
        }
        Histogram {
            base,
            counts,
            total: p.total(),
        }
    }

    pub fn from_values(values: &[i64]) -> Self {
        Self::from_population(&Population::from_values(values).expect("nonempty"))
    }

    pub fn base(&self) -> i64 {
        self.base
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn max_class(&self) -> i64 {
        self.base + self.counts.len() as i64 - 1
    }

    pub fn width(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn add(&mut self, class: i64) {
        if class < self.base {
            let extra = (self.base - class) as usize;
            self.counts.splice(0..0, std::iter::repeat_n(0, extra));
            self.base = class;
        } else if class > self.max_class() {
            let len = (class - self.base + 1) as usize;
            self.counts.resize(len, 0);
        }
        self.counts[(class - self.base) as usize] += 1;
        self.total += 1;
    }

    pub fn remove(&mut self, class: i64) {
        let idx = (class - self.base) as usize;
        debug_assert!(self.counts[idx] > 0, "removing from empty class {class}");
        self.counts[idx] -= 1;
        self.total -= 1;
        if self.total == 0 {
            // Only reachable transiently inside a move; callers add first.
            return;
        }
        let lead = self.counts.iter().take_while(|&&c| c == 0).count();
        if lead > 0 {
            self.counts.drain(..lead);
            self.base += lead as i64;
        }
        while self.counts.last() == Some(&0) {
            self.counts.pop();
        }
    }

    /// Moves one individual from `from` to `to`.
    pub fn shift(&mut self, from: i64, to: i64) {
        if from != to {
            self.add(to);
            self.remove(from);
        }
    }

    /// Index of the cell holding the `r`-th individual, `r < total`.
    pub fn locate(&self, mut r: u64) -> usize {
        for (i, &c) in self.counts.iter().enumerate() {
            if r < c {
                return i;
            }
            r -= c;
        }
        unreachable!("rank beyond population size")
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (i64, u64)> + Clone + '_ {
        let base = self.base;
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (base + i as i64, c))
    }

    pub fn to_population(&self) -> Population {
        Population::from_counts(self.iter()).expect("nonempty histogram")
    }

    pub fn record(&self, time: f64, kd_beta: f64) -> TrajectoryRecord {
        summarize(self.iter(), self.total, time, kd_beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_grows_and_trims() {
        let mut h = Histogram::from_values(&[0, 0, 1]);
        h.shift(0, -3);
        assert_eq!((h.base(), h.max_class()), (-3, 1));
        assert_eq!(h.counts(), &[1, 0, 0, 1, 1]);
        h.shift(-3, 5);
        assert_eq!((h.base(), h.max_class()), (0, 5));
        h.shift(5, 1);
        assert_eq!(h.counts(), &[1, 2]);
        assert_eq!(
            h.to_population(),
            Population::from_counts([(0, 1), (1, 2)]).unwrap()
        );
    }

    #[test]
    fn locate_by_rank() {
        let h = Histogram::from_values(&[2, 4, 4, 4]);
        assert_eq!(h.locate(0), 0);
        assert_eq!(h.locate(1), 2);
        assert_eq!(h.locate(3), 2);
    }
}
