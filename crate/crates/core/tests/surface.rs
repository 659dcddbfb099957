use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nmcode::bitlinalg::BitVec;
use nmcode::codes::{parse_registry, CodeEntry, LinearCode, RpeScheme};
use nmcode::harness::{ExperimentConfig, Mode, Target};
use nmcode::nmcpipeline::{build_acd_nmc, toy_ss_nmc, Coder, PipelineSpec};
use nmcode::prg::{slow_mul, Gf2m};

#[test]
fn registry_round_trips_through_json() {
    let codes = [LinearCode::hamming74().unwrap(), LinearCode::extended_hamming84().unwrap(), LinearCode::simplex(3).unwrap()];
    let entries: Vec<CodeEntry> = codes.iter().map(CodeEntry::from_code).collect();
    let back = parse_registry(&serde_json::to_string(&entries).unwrap()).unwrap();
    for (a, b) in codes.iter().zip(&back) {
        assert_eq!((a.k(), a.n(), a.distance()), (b.k(), b.n(), b.distance()));
        assert_eq!(a.generator(), b.generator());
    }
}

#[test]
fn registry_rejects_wrong_distance() {
    let mut e = CodeEntry::from_code(&LinearCode::hamming74().unwrap());
    e.distance = 4;
    assert!(parse_registry(&serde_json::to_string(&[e]).unwrap()).is_err());
}

#[test]
fn bit_strings_put_position_zero_first() {
    let v: BitVec = "1000".parse().unwrap();
    assert!(v.get(0));
    assert_eq!(v.count_ones(), 1);
    assert_eq!(v.to_string(), "1000");
    assert!("10x1".parse::<BitVec>().is_err());
}

#[test]
fn rpe_decodes_what_it_encodes() {
    let rpe = RpeScheme::new(LinearCode::hamming(3).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let x = BitVec::random(rpe.message_len(), &mut rng);
        let c = rpe.encode_rng(&x, &mut rng).unwrap();
        assert_eq!(rpe.decode(&c).unwrap(), x);
    }
}

#[test]
fn field_tables_agree_with_shift_and_add() {
    for m in [3, 4, 8] {
        let f = Gf2m::get(m);
        for a in 0..f.size().min(64) {
            for b in 0..f.size().min(64) {
                assert_eq!(f.mul(a, b), slow_mul(m, a, b));
            }
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a)), 1);
            }
        }
    }
}

#[test]
fn desk_pipeline_round_trips() {
    let spec = PipelineSpec::desk();
    let acd = build_acd_nmc(&spec, toy_ss_nmc(spec.toy_k).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for x in 0..1u64 << acd.message_len() {
        let x = BitVec::from_u64(x, acd.message_len());
        for _ in 0..5 {
            let c = acd.encode(&x, &mut rng).unwrap();
            assert_eq!(c.len(), acd.codeword_len());
            assert_eq!(acd.decode(&c).unwrap(), Some(x.clone()));
        }
    }
}

#[test]
fn experiment_config_defaults() {
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"master_seed": 1, "mode": "exhaustive",
            "target": {"kind": "star-reduction", "k": 1, "n": 8, "p_log_inv": 1, "sigma": 1, "t": 2, "collapse": "base"}}"#,
    )
    .unwrap();
    assert_eq!(cfg.mode, Mode::Exhaustive);
    assert!(cfg.adversaries.is_empty() && !cfg.standard_suite);
    assert!(matches!(cfg.target, Target::StarReduction(_)));
    assert!(cfg.alpha > 0.0 && cfg.alpha < 1.0);
}
