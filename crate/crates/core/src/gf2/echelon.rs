//! Incremental forward elimination with combination tracking.
//!
//! Rows are fed one at a time. Each stored pivot row remembers which input
//! rows were added together to produce it, so a row that reduces to zero
//! yields the support of a nullspace vector directly.

use super::BitVector;

#[derive(Clone, Debug)]
struct Pivot {
    column: usize,
    row: BitVector,
    combo: Option<BitVector>,
}

/// Outcome of inserting one row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Insertion {
    /// The row extended the span.
    Independent,
    /// The row lies in the span of the earlier rows. Holds the indices of the
    /// input rows (including this one) that sum to zero when tracking is on.
    Dependent(Option<Vec<usize>>),
}

/// Row reducer over GF(2).
#[derive(Clone, Debug)]
pub struct RowReducer {
    width: usize,
    track: Option<usize>,
    inputs: usize,
    pivots: Vec<Pivot>,
}

impl RowReducer {
    /// Reducer without combination tracking (rank only).
    pub fn new(width: usize) -> Self {
        Self {
            width,
            track: None,
            inputs: 0,
            pivots: Vec::new(),
        }
    }

    /// Reducer that tracks combinations of up to `capacity` input rows.
    pub fn tracking(width: usize, capacity: usize) -> Self {
        Self {
            width,
            track: Some(capacity),
            inputs: 0,
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// Reduces `row` against the stored pivots, returning the remainder and
    /// (when tracking) the set of input rows that were added to it.
    pub fn reduce(&self, row: &BitVector) -> (BitVector, Option<BitVector>) {
        assert_eq!(row.len(), self.width, "row width does not match reducer");
        let mut rem = row.clone();
        let mut combo = self.track.map(BitVector::zeros);
        for p in &self.pivots {
            if rem.get(p.column) {
                rem.xor_assign(&p.row);
                if let (Some(c), Some(pc)) = (combo.as_mut(), p.combo.as_ref()) {
                    c.xor_assign(pc);
                }
            }
        }
        (rem, combo)
    }

    pub fn contains(&self, row: &BitVector) -> bool {
        self.reduce(row).0.is_zero()
    }

    /// Feeds the next input row.
    pub fn insert(&mut self, row: &BitVector) -> Insertion {
        let index = self.inputs;
        self.inputs += 1;
        let (rem, mut combo) = self.reduce(row);
        if let Some(c) = combo.as_mut() {
            assert!(index < c.len(), "reducer tracking capacity exceeded");
            c.toggle(index);
        }
        match rem.first_one() {
            Some(column) => {
                self.pivots.push(Pivot {
                    column,
                    row: rem,
                    combo,
                });
                Insertion::Independent
            }
            None => Insertion::Dependent(combo.map(|c| c.iter_ones().collect())),
        }
    }
}
