use proptest::prelude::*;
use rectfrac::geometry::{classify, ConeIndex, ConeLayout, ExponentSet};
use rectfrac::grid::{read_grid_csv, write_grid_csv, Axis, Grid, GridFunction, MeasureTable, Weight, WeightKind};
use rectfrac::operators::{apply_i_alpha, apply_m_alpha_centered, apply_m_mu};

fn small_grid() -> impl Strategy<Value = Grid> {
    (2usize..7, 2usize..7, -2.0f64..0.0, 0.5f64..3.0).prop_map(|(a, b, lo, len)| {
        Grid::new(vec![Axis::new(lo, lo + len, a).unwrap(), Axis::new(-1.0, 1.0, b).unwrap()]).unwrap()
    })
}

fn function_on(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len)
}

fn grid_and_function() -> impl Strategy<Value = (Grid, Vec<f64>, Vec<f64>)> {
    small_grid().prop_flat_map(|g| {
        let n = g.len();
        (Just(g), function_on(n), function_on(n))
    })
}

fn exponents() -> ExponentSet {
    ExponentSet::new(2, 2.0, 4.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operators_are_monotone((g, a, b) in grid_and_function()) {
        let m = MeasureTable::new(&g, &Weight::from_kind(WeightKind::ProductExponential, &g).unwrap()).unwrap();
        let f = GridFunction::new(a.clone()).unwrap();
        let bigger = GridFunction::new(a.iter().zip(&b).map(|(x, y)| x + y).collect()).unwrap();
        let e = exponents();
        let pairs = [
            (apply_i_alpha(&f, &m, &e).unwrap(), apply_i_alpha(&bigger, &m, &e).unwrap()),
            (apply_m_alpha_centered(&f, &m, &e, false).unwrap(), apply_m_alpha_centered(&bigger, &m, &e, false).unwrap()),
            (apply_m_mu(&f, &m).unwrap(), apply_m_mu(&bigger, &m).unwrap()),
        ];
        for (lo, hi) in pairs {
            for (x, y) in lo.samples().iter().zip(hi.samples()) {
                prop_assert!(*x <= y * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn operators_are_homogeneous((g, a, _) in grid_and_function(), c in 0.1f64..10.0) {
        let m = MeasureTable::lebesgue(&g);
        let e = exponents();
        let f = GridFunction::new(a.clone()).unwrap();
        let cf = f.scaled(c).unwrap();
        let i1 = apply_i_alpha(&f, &m, &e).unwrap();
        let ic = apply_i_alpha(&cf, &m, &e).unwrap();
        let m1 = apply_m_alpha_centered(&f, &m, &e, true).unwrap();
        let mc = apply_m_alpha_centered(&cf, &m, &e, true).unwrap();
        for (x, y) in i1.samples().iter().zip(ic.samples()).chain(m1.samples().iter().zip(mc.samples())) {
            prop_assert!((c * x - y).abs() <= 1e-12 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn csv_round_trip((g, a, _) in grid_and_function()) {
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &g, &a).unwrap();
        let (g2, b) = read_grid_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(g2, g);
        prop_assert_eq!(b, a);
    }

    #[test]
    fn cones_are_shift_invariant(t in prop::collection::vec(0i64..6, 2..4), c in -5i64..5) {
        let shifted: Vec<i64> = t.iter().map(|v| v + c).collect();
        let (a, sa) = ConeIndex::normalize(&t);
        let (b, sb) = ConeIndex::normalize(&shifted);
        prop_assert_eq!(a, b);
        prop_assert_eq!(sb - sa, c);
    }

    #[test]
    fn classification_agrees_with_layout(x in 0usize..16, y in 0usize..16, u in 0usize..8, v in 0usize..8) {
        let g = Grid::new(vec![Axis::new(0.0, 1.0, 16).unwrap(), Axis::new(0.0, 2.0, 8).unwrap()]).unwrap();
        let layout = ConeLayout::new(&g);
        let (a, b) = (g.center(g.index(&[x, u])), g.center(g.index(&[y, v])));
        let geometric = classify(&a, &b);
        let indexed = layout.classify_cells(&[x, u], &[y, v]).map(|(c, j)| (layout.cones()[c].clone(), j));
        prop_assert_eq!(geometric, indexed);
    }
}

#[test]
fn csv_rejects_truncated_input() {
    let g = Grid::uniform(2, 0.0, 1.0, 3).unwrap();
    let mut buf = Vec::new();
    write_grid_csv(&mut buf, &g, &[1.0; 9]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
    assert!(read_grid_csv(cut.as_bytes()).is_err());
}
