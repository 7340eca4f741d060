use fptc_core::split::*;
use proptest::prelude::*;
use std::collections::HashSet;

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("scene_{i:05}")).collect()
}

#[test]
fn full_dataset_sizes() {
    let s = split_dataset(&ids(3518), 0).unwrap();
    assert_eq!(s.sizes(), [1407, 1055, 352, 352, 352]);
}

#[test]
fn exact_ratio_for_ten() {
    assert_eq!(apportion(10), [4, 3, 1, 1, 1]);
}

#[test]
fn same_seed_same_split() {
    assert_eq!(split_dataset(&ids(50), 9).unwrap(), split_dataset(&ids(50), 9).unwrap());
    assert_ne!(split_dataset(&ids(50), 9).unwrap(), split_dataset(&ids(50), 10).unwrap());
}

#[test]
fn too_few_items() {
    assert!(split_dataset(&ids(4), 0).is_err());
}

proptest! {
    #[test]
    fn partition_is_disjoint_and_covering(n in 5usize..400, seed in any::<u64>()) {
        let all = ids(n);
        let s = split_dataset(&all, seed).unwrap();
        let mut seen = HashSet::new();
        for part in s.parts() {
            for id in part {
                prop_assert!(seen.insert(id.clone()));
            }
        }
        prop_assert_eq!(seen.len(), n);
    }
}
