use klac::gf2::{BitMatrix, BitVector};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
    proptest::collection::vec(proptest::collection::vec(any::<bool>(), cols), rows).prop_map(move |rows| {
        BitMatrix::from_rows(cols, rows.iter().map(|r| BitVector::from_bools(r)).collect()).unwrap()
    })
}

// Rank by counting the distinct vectors in the row span.
fn span_rank(m: &BitMatrix) -> usize {
    let mut span = std::collections::HashSet::new();
    span.insert(BitVector::zeros(m.num_cols()));
    for r in m.rows() {
        let current: Vec<BitVector> = span.iter().cloned().collect();
        for v in current {
            span.insert(v.xor(r));
        }
    }
    span.len().trailing_zeros() as usize
}

proptest! {
    #[test]
    fn rank_matches_span_size(m in (1usize..7, 1usize..9).prop_flat_map(|(r, c)| matrix(r, c))) {
        prop_assert_eq!(m.rank(), span_rank(&m));
        prop_assert!(m.rank() <= m.num_rows().min(m.num_cols()));
        prop_assert_eq!(m.transpose().rank(), m.rank());
    }

    #[test]
    fn solve_row_round_trips(m in (1usize..8, 1usize..10).prop_flat_map(|(r, c)| matrix(r, c)), coeffs in any::<u64>()) {
        let d = BitVector::from_u64(coeffs & ((1 << m.num_rows()) - 1), m.num_rows());
        let target = m.combine(&d).unwrap();
        let solved = m.solve_row(&target).unwrap().expect("target is in the row space");
        prop_assert_eq!(m.combine(&solved).unwrap(), target);
    }

    #[test]
    fn row_basis_spans_and_is_independent(m in (1usize..8, 1usize..8).prop_flat_map(|(r, c)| matrix(r, c))) {
        let b = m.row_basis();
        prop_assert_eq!(b.num_rows(), m.rank());
        prop_assert_eq!(b.rank(), b.num_rows());
        for r in m.rows() {
            prop_assert!(b.solve_row(r).unwrap().is_some());
        }
    }

    #[test]
    fn circuits_are_minimal(m in (1usize..9, 1usize..6).prop_flat_map(|(r, c)| matrix(r, c))) {
        match m.find_circuit() {
            None => prop_assert_eq!(m.rank(), m.num_rows()),
            Some(c) => {
                prop_assert!(m.sum_rows(c.iter().copied()).is_zero());
                for skip in 0..c.len() {
                    let rest: Vec<usize> = c.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &r)| r).collect();
                    prop_assert_eq!(m.select_rows(&rest).rank(), rest.len());
                }
            }
        }
    }

    #[test]
    fn text_round_trip(m in (1usize..6, 1usize..70).prop_flat_map(|(r, c)| matrix(r, c))) {
        prop_assert_eq!(BitMatrix::parse_text(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn u64_order_matches_string_order(a in any::<u32>(), b in any::<u32>()) {
        let (x, y) = (BitVector::from_u64(a as u64, 32), BitVector::from_u64(b as u64, 32));
        prop_assert_eq!(x.cmp(&y), x.to_string().cmp(&y.to_string()));
        prop_assert_eq!(x.to_u64(), a as u64);
    }
}
