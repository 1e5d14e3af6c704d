use num_complex::Complex;
use proptest::prelude::*;
use rnls_core::snapshot::{load_snapshot, read_snapshot, save_snapshot, write_snapshot, Snapshot};
use rnls_core::{Field, Grid};

fn field_strategy() -> impl Strategy<Value = Field> {
    (1usize..4, -5i64..5, prop::sample::select(vec![4usize, 6, 8]), 0.1..100.0f64).prop_flat_map(
        |(n, offset, m, length)| {
            prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), n * m * m).prop_map(move |v| {
                let grid = Grid::new(length, m).unwrap();
                let labels = (0..n as i64).map(|k| k + offset).collect();
                let comps = v
                    .chunks(m * m)
                    .map(|c| c.iter().map(|&(a, b)| Complex::new(a, b)).collect())
                    .collect();
                Field::from_components(&grid, labels, comps).unwrap()
            })
        },
    )
}

proptest! {
    #[test]
    fn round_trip_is_bit_exact(field in field_strategy(), time in 0.0..1e4f64) {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, time, &field).unwrap();
        let n = field.n_components();
        let m = field.grid().points();
        prop_assert_eq!(buf.len(), 36 + 16 * n * m * m);
        let back: Snapshot<f64> = read_snapshot(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(back.time.to_bits(), time.to_bits());
        prop_assert_eq!(back.field.labels(), field.labels());
        prop_assert_eq!(back.field.grid().length().to_bits(), field.grid().length().to_bits());
        for (a, b) in back.field.data().iter().zip(field.data()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn any_truncation_is_rejected(field in field_strategy(), cut in 1usize..40) {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, 1.0, &field).unwrap();
        let keep = buf.len().saturating_sub(cut);
        prop_assert!(read_snapshot::<f64, _>(&mut &buf[..keep]).is_err());
    }
}

#[test]
fn file_round_trip() {
    let grid = Grid::new(3.0, 8).unwrap();
    let field = Field::from_fn(&grid, vec![2, 3], |c, x, y| Complex::new(x * y, c as f64)).unwrap();
    let path = std::env::temp_dir().join(format!("rnls-snapshot-{}.rnls", std::process::id()));
    save_snapshot(&path, 0.5, &field).unwrap();
    let back: Snapshot<f64> = load_snapshot(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(back.field, field);
    assert_eq!(back.time, 0.5);
}

#[test]
fn single_precision_fields_widen_on_write() {
    let grid = rnls_core::Grid32::new(2.0, 4).unwrap();
    let field = rnls_core::Field32::from_fn(&grid, vec![0], |_, x, _| Complex::new(x, 0.25)).unwrap();
    let mut buf = Vec::new();
    write_snapshot(&mut buf, 0.0f32, &field).unwrap();
    let back: Snapshot<f64> = read_snapshot(&mut buf.as_slice()).unwrap();
    assert_eq!(back.field.data()[0], Complex::new(-1.0, 0.25));
}
