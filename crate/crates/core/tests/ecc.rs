use ldc_forge::ecc::calibrate::{calibrate_all, frozen};
use ldc_forge::ecc::gf::Field;
use ldc_forge::ecc::rs::ReedSolomon;
use ldc_forge::ecc::{EccError, Justesen, JustesenParams};
use proptest::prelude::*;

fn rs73() -> ReedSolomon {
    ReedSolomon::new(Field::new(3).unwrap(), 7, 3).unwrap()
}

fn corrupt(cw: &[u16], errs: &[(usize, u16)]) -> Vec<Option<u16>> {
    let mut r: Vec<Option<u16>> = cw.iter().copied().map(Some).collect();
    for &(p, e) in errs {
        r[p] = Some(cw[p] ^ e);
    }
    r
}

fn weight_two_patterns() -> Vec<Vec<(usize, u16)>> {
    let mut out = vec![Vec::new()];
    for p in 0..7 {
        for e in 1..8 {
            out.push(vec![(p, e)]);
            for q in p + 1..7 {
                for f in 1..8 {
                    out.push(vec![(p, e), (q, f)]);
                }
            }
        }
    }
    out
}

#[test]
fn rs_7_3_corrects_every_weight_two_pattern() {
    let code = rs73();
    let patterns = weight_two_patterns();
    assert_eq!(patterns.len(), 1 + 49 + 21 * 49);
    for msg in [[0, 0, 0], [1, 2, 3], [7, 7, 7], [5, 0, 6]] {
        let cw = code.encode(&msg).unwrap();
        for errs in &patterns {
            assert_eq!(code.decode(&corrupt(&cw, errs)).unwrap(), msg, "{errs:?}");
        }
    }
}

#[test]
fn rs_7_3_weight_three_includes_detected_failures() {
    let code = rs73();
    let cw = code.encode(&[3, 1, 4]).unwrap();
    let mut detected = 0;
    let mut miscorrected = 0;
    for a in 0..7 {
        for b in a + 1..7 {
            for c in b + 1..7 {
                for e in 1..8 {
                    match code.decode(&corrupt(&cw, &[(a, e), (b, e), (c, e)])) {
                        Err(EccError::DecodeFailure) => detected += 1,
                        Ok(m) => {
                            assert_ne!(m, vec![3, 1, 4]);
                            miscorrected += 1;
                        }
                        Err(other) => panic!("{other:?}"),
                    }
                }
            }
        }
    }
    assert!(detected > 0, "no detected failure among weight-3 patterns");
    assert_eq!(detected + miscorrected, 35 * 7);
}

#[test]
fn rs_7_3_erasures_and_errors() {
    let code = rs73();
    let msg = [6, 2, 5];
    let cw = code.encode(&msg).unwrap();
    for mask in 0u32..128 {
        let erased = mask.count_ones() as usize;
        let mut r: Vec<Option<u16>> = cw.iter().copied().map(Some).collect();
        for (p, slot) in r.iter_mut().enumerate() {
            if mask >> p & 1 == 1 {
                *slot = None;
            }
        }
        if erased <= 4 {
            assert_eq!(code.decode(&r).unwrap(), msg, "mask {mask:07b}");
        }
        // One error on top of at most two erasures: 2e + s = 4.
        if erased <= 2 {
            let p = (0..7).find(|&p| mask >> p & 1 == 0).unwrap();
            r[p] = Some(cw[p] ^ 1);
            assert_eq!(code.decode(&r).unwrap(), msg, "mask {mask:07b} error at {p}");
        }
    }
}

#[test]
fn encoding_is_evaluation_at_one_through_n() {
    let code = rs73();
    let f = code.field().clone();
    let msg = [2u16, 5, 7];
    let cw = code.encode(&msg).unwrap();
    for (j, &c) in cw.iter().enumerate() {
        let x = code.point(j);
        let direct = msg.iter().rev().fold(0, |acc, &m| f.add(f.mul(acc, x), m));
        assert_eq!(c, direct);
    }
}

#[test]
fn calibration_reproduces_the_fixture() {
    let table = frozen();
    let codes: Vec<JustesenParams> = table.calibrations.iter().map(|c| c.params).collect();
    let fresh = calibrate_all(&codes, table.random_trials, table.seed).unwrap();
    assert_eq!(fresh, table);
    let by = |m, n, k| table.calibrations.iter().find(|c| c.params == JustesenParams::new(m, n, k)).unwrap().kill_flips;
    assert_eq!(by(6, 63, 21), 43);
    assert_eq!(by(6, 21, 7), 15);
    assert_eq!(by(4, 15, 4), 12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn justesen_survives_any_pattern_below_the_kill(
        msg in proptest::collection::vec(any::<bool>(), 16),
        flips in proptest::collection::btree_set(0usize..120, 0..12),
    ) {
        let code = Justesen::new(JustesenParams::new(4, 15, 4)).unwrap();
        let mut cw = code.encode(&msg).unwrap();
        for &p in &flips {
            cw[p] = !cw[p];
        }
        prop_assert_eq!(code.decode(&cw).unwrap(), msg);
    }

    #[test]
    fn justesen_survives_flips_packed_into_few_inner_words(
        msg in proptest::collection::vec(any::<bool>(), 16),
        start in 0usize..100,
    ) {
        let code = Justesen::new(JustesenParams::new(4, 15, 4)).unwrap();
        let mut cw = code.encode(&msg).unwrap();
        for p in start..start + 11 {
            cw[p % 120] = !cw[p % 120];
        }
        prop_assert_eq!(code.decode(&cw).unwrap(), msg);
    }
}
