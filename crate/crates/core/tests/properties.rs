use proptest::prelude::*;

use qpq_core::analytics::{info_honest_multi, info_med_multi, info_ud_multi};
use qpq_core::attacks::{bayes_update, Belief, RoundLikelihood};
use qpq_core::distillation::{
    distill, encrypt_multi, encrypt_single, Database, FinalKey, RawKey, ShiftDeclaration,
};

fn key_and_layout() -> impl Strategy<Value = (usize, usize, Vec<bool>, Vec<bool>)> {
    (1usize..=6, 1usize..=24).prop_flat_map(|(k, n)| {
        (
            Just(k),
            Just(n),
            proptest::collection::vec(any::<bool>(), k * n),
            proptest::collection::vec(any::<bool>(), k * n),
        )
    })
}

fn db_and_key() -> impl Strategy<Value = (Vec<bool>, Vec<bool>, usize)> {
    (1usize..=64).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<bool>(), n),
            0..n,
        )
    })
}

fn xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

proptest! {
    #[test]
    fn distill_is_linear((k, n, a, b) in key_and_layout()) {
        let da = distill(&RawKey::new(a.clone(), k, n).unwrap());
        let db = distill(&RawKey::new(b.clone(), k, n).unwrap());
        let dab = distill(&RawKey::new(xor(&a, &b), k, n).unwrap());
        prop_assert_eq!(dab.0, xor(&da.0, &db.0));
    }

    #[test]
    fn encryption_is_an_involution((data, key, s) in db_and_key()) {
        let n = data.len();
        let db = Database(data);
        let key = FinalKey(key);
        let shift = ShiftDeclaration::new(s, n).unwrap();
        let twice = encrypt_single(&encrypt_single(&db, &key, shift).unwrap(), &key, shift).unwrap();
        prop_assert_eq!(twice, db);
    }

    #[test]
    fn shift_equals_rotated_key((data, key, s) in db_and_key()) {
        let n = data.len();
        let db = Database(data);
        let key = FinalKey(key);
        let shift = ShiftDeclaration::new(s, n).unwrap();
        let zero = ShiftDeclaration::new(0, n).unwrap();
        let direct = encrypt_single(&db, &key, shift).unwrap();
        let rotated = encrypt_single(&db, &key.rotated(shift), zero).unwrap();
        prop_assert_eq!(direct, rotated);
    }

    #[test]
    fn multi_key_is_composed_single_key(
        (data, k1, s1) in db_and_key(),
        seed in any::<u64>(),
    ) {
        let n = data.len();
        let k2: Vec<bool> = (0..n).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let s2 = (seed as usize) % n;
        let db = Database(data);
        let keys = [FinalKey(k1), FinalKey(k2)];
        let shifts = [ShiftDeclaration::new(s1, n).unwrap(), ShiftDeclaration::new(s2, n).unwrap()];
        let multi = encrypt_multi(&db, &keys, &shifts).unwrap();
        let chained = encrypt_single(
            &encrypt_single(&db, &keys[0], shifts[0]).unwrap(),
            &keys[1],
            shifts[1],
        )
        .unwrap();
        prop_assert_eq!(multi, chained);
    }

    #[test]
    fn bayes_updates_commute(
        p in 0.01f64..0.99,
        a in 0.01f64..0.99,
        b in 0.01f64..0.99,
    ) {
        let prior = Belief::new(p).unwrap();
        let la = RoundLikelihood::new(a, 1.0 - a).unwrap();
        let lb = RoundLikelihood::new(b, 1.0 - b).unwrap();
        let ab = bayes_update(bayes_update(prior, la).unwrap(), lb).unwrap();
        let ba = bayes_update(bayes_update(prior, lb).unwrap(), la).unwrap();
        prop_assert!((ab.p0() - ba.p0()).abs() < 1e-12);
        for post in [ab, ba] {
            prop_assert!((0.0..=1.0).contains(&post.p0()));
            prop_assert!((post.p0() + post.p1() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn med_information_grows_with_rounds(k in 1u32..=12, m in 1u32..2000) {
        let now = info_med_multi(k, m);
        let next = info_med_multi(k, m + 1);
        prop_assert!(next >= now - 1e-12);
        prop_assert!((0.0..=1.0).contains(&now));
    }

    #[test]
    fn information_shrinks_with_k(k in 1u32..=16, m in 1u32..3000) {
        prop_assert!(info_med_multi(k + 1, m) <= info_med_multi(k, m) + 1e-12);
        prop_assert!(info_ud_multi(k + 1, m) <= info_ud_multi(k, m) + 1e-12);
        prop_assert!(info_honest_multi(k + 1, m) <= info_honest_multi(k, m) + 1e-12);
    }

    #[test]
    fn attacks_dominate_honest_user(k in 3u32..=8, m in 1u32..=10_000) {
        let med = info_med_multi(k, m);
        let ud = info_ud_multi(k, m);
        let honest = info_honest_multi(k, m);
        prop_assert!(med >= ud - 1e-12, "med {} < ud {}", med, ud);
        prop_assert!(ud >= honest - 1e-12, "ud {} < honest {}", ud, honest);
    }
}
