mod common;

use proptest::prelude::*;
use recordlab::records::{upper_records, RecordSequence};

use common::{brute_force_ages, brute_force_record_times};

fn series() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-1e3f64..1e3, 1..200),
        // Integer-valued and tie heavy.
        prop::collection::vec((0i32..6).prop_map(f64::from), 1..200),
        // Random walk.
        prop::collection::vec(-1.0f64..1.0, 1..200).prop_map(|steps| {
            steps
                .iter()
                .scan(0.0, |acc, s| {
                    *acc += s;
                    Some(*acc)
                })
                .collect()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn matches_definition(xs in series()) {
        let rs = upper_records(&xs).unwrap();
        prop_assert_eq!(&rs.record_times, &brute_force_record_times(&xs));
        let (closed, open) = brute_force_ages(&xs);
        prop_assert_eq!(&rs.closed_ages, &closed);
        prop_assert_eq!(rs.censored_age, open);
        let oracle_max = closed.iter().copied().chain(open).max();
        prop_assert_eq!(rs.longest_record_age(true).ok(), oracle_max);
    }

    #[test]
    fn age_accounting(xs in series()) {
        let rs = upper_records(&xs).unwrap();
        prop_assert_eq!(rs.record_times[0], 1);
        prop_assert!(rs.record_values.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(rs.closed_ages.iter().all(|&a| a >= 1));
        let last = *rs.record_times.last().unwrap();
        prop_assert_eq!(last as u64 + rs.censored_age.unwrap_or(0), xs.len() as u64);
        let total: u64 = rs.record_ages(true).iter().sum();
        prop_assert_eq!(total, xs.len() as u64 - 1);
    }

    #[test]
    fn monotone_maps_keep_record_times(xs in prop::collection::vec(-5.0f64..5.0, 1..200), c in 0.01f64..100.0) {
        let base = upper_records(&xs).unwrap().record_times;
        let exp: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        prop_assert_eq!(&upper_records(&exp).unwrap().record_times, &base);
        let scaled: Vec<f64> = exp.iter().map(|x| c * x).collect();
        prop_assert_eq!(&upper_records(&scaled).unwrap().record_times, &upper_records(&exp).unwrap().record_times);
        let cubed: Vec<f64> = xs.iter().map(|x| x * x * x + 2.0 * x).collect();
        prop_assert_eq!(&upper_records(&cubed).unwrap().record_times, &base);
    }

    #[test]
    fn new_global_max_closes_open_age(xs in series()) {
        let before = upper_records(&xs).unwrap();
        let top = xs.iter().cloned().fold(f64::MIN, f64::max) + 1.0;
        let mut ext = xs.clone();
        ext.push(top);
        let after = upper_records(&ext).unwrap();
        prop_assert_eq!(after.record_count(), before.record_count() + 1);
        let mut expect = before.closed_ages.clone();
        expect.push(before.censored_age.unwrap_or(0) + 1);
        prop_assert_eq!(&after.closed_ages, &expect);
        prop_assert_eq!(after.censored_age, None);
    }

    #[test]
    fn tsv_roundtrip(xs in series()) {
        let rs = upper_records(&xs).unwrap();
        prop_assert_eq!(RecordSequence::from_tsv(&rs.to_tsv()).unwrap(), rs);
    }
}
