use labelnoise::metrics::{cell_disagreement, EvalCounts};
use labelnoise::{framewise_counts, prf, resample, truncate, EvalResult, FrameGrid, LabelMatrix};
use proptest::prelude::*;

fn matrix_pair() -> impl Strategy<Value = (LabelMatrix, LabelMatrix)> {
    (1..40usize, 1..10usize).prop_flat_map(|(t, k)| {
        let cells = prop::collection::vec(0..2u8, t * k);
        (cells.clone(), cells).prop_map(move |(a, b)| (build(t, k, &a), build(t, k, &b)))
    })
}

fn build(t: usize, k: usize, cells: &[u8]) -> LabelMatrix {
    let rows: Vec<Vec<u8>> = cells.chunks(k).map(<[u8]>::to_vec).collect();
    LabelMatrix::from_rows(FrameGrid::new(31.25, t).unwrap(), k, &rows).unwrap()
}

proptest! {
    #[test]
    fn counts_swap_with_arguments((a, b) in matrix_pair()) {
        let ab = framewise_counts(&a, &b).unwrap();
        let ba = framewise_counts(&b, &a).unwrap();
        prop_assert_eq!((ab.tp, ab.fp, ab.fn_), (ba.tp, ba.fn_, ba.fp));
    }

    #[test]
    fn fmeasure_is_scale_invariant(tp in 0..10_000u64, fp in 0..10_000u64, fn_ in 0..10_000u64, s in 1..1000u64) {
        let f1: EvalResult = prf(EvalCounts { tp, fp, fn_ });
        let fs: EvalResult = prf(EvalCounts { tp: tp * s, fp: fp * s, fn_: fn_ * s });
        prop_assert!((f1.fmeasure - fs.fmeasure).abs() <= 1e-12);
        prop_assert_eq!(f1.fmeasure_defined, fs.fmeasure_defined);
    }

    #[test]
    fn self_comparison_is_perfect((a, _) in matrix_pair()) {
        prop_assume!(a.count_active() > 0);
        let r: EvalResult = prf(framewise_counts(&a, &a).unwrap());
        prop_assert_eq!((r.precision, r.recall, r.fmeasure), (1.0, 1.0, 1.0));
    }

    #[test]
    fn resample_identity_and_idempotence((a, _) in matrix_pair(), target in 1..120usize) {
        prop_assert_eq!(&resample(&a, *a.grid()).unwrap(), &a);
        let grid = FrameGrid::new(100.0, target).unwrap();
        let once = resample(&a, grid).unwrap();
        prop_assert_eq!(&resample(&once, grid).unwrap(), &once);
    }

    #[test]
    fn disagreement_matches_naive_loop((a, b) in matrix_pair()) {
        let mut naive = 0;
        for t in 0..a.num_frames() {
            for k in 0..a.num_labels() {
                if a.get(t, k) != b.get(t, k) {
                    naive += 1;
                }
            }
        }
        prop_assert_eq!(cell_disagreement(&a, &b).unwrap().differing_frames, naive);
    }

    #[test]
    fn truncate_never_grows((a, _) in matrix_pair(), secs in 0.04..3.0f64) {
        let t = truncate(&a, secs).unwrap();
        prop_assert!(t.num_frames() <= a.num_frames());
        for f in 0..t.num_frames() {
            prop_assert_eq!(t.row(f), a.row(f));
        }
    }
}

#[test]
fn empty_prediction_has_undefined_precision() {
    let r: EvalResult = prf(EvalCounts {
        tp: 0,
        fp: 0,
        fn_: 5,
    });
    assert_eq!(r.precision, 0.0);
    assert!(!r.precision_defined);
    assert!(r.recall_defined);
    assert_eq!(r.fmeasure, 0.0);
}

#[test]
fn shape_mismatch_is_rejected() {
    let a = LabelMatrix::zeros(FrameGrid::new(100.0, 3).unwrap(), 2);
    let b = LabelMatrix::zeros(FrameGrid::new(100.0, 4).unwrap(), 2);
    assert!(framewise_counts(&a, &b).is_err());
}
