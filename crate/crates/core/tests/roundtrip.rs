use std::collections::BTreeMap;

use proptest::prelude::*;
use qpolar::code::{initial_info_set, validate_css, validate_precoder, CodeFile, QuantumCode};
use qpolar::decoder::{measure_syndrome, QuantumDecoder};
use qpolar::ga::{candidate_groups, mutate_precoder, GaConfig};
use qpolar::montecarlo::{parse_csv, run_sweep, to_csv};
use qpolar::{ChannelParam, PauliVec};
use rand::SeedableRng;

fn bundled() -> CodeFile {
    CodeFile::load(concat!(env!("CARGO_MANIFEST_DIR"), "/codes/n64_k2_t100.json")).unwrap()
}

#[test]
fn bundled_code_is_valid_and_renders_identically() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/codes/n64_k2_t100.json")).unwrap();
    let file = bundled();
    assert_eq!(file.render(), text);
    let code = file.to_code().unwrap();
    assert!(validate_css(code.spec()).is_valid());
    assert!(validate_precoder(code.precoder(), code.spec()).unwrap().is_valid());
    assert_eq!(code.precoder().nnz(), 100);
    assert_eq!(code.logical_set().len(), 2);
}

#[test]
fn config_serializes_back() {
    let mut cfg = GaConfig::new(6, 0.05, 4, 8, 16, 10, 2000, 1);
    cfg.forced_info = Some(vec![63]);
    cfg.forced_frozen = Some(vec![0]);
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(GaConfig::parse(&text).unwrap(), cfg);
}

#[test]
fn sweep_csv_round_trip() {
    let code = bundled().to_code().unwrap();
    let points = run_sweep(&code, &[0.02, 0.1], 2, 300, 4, 0).unwrap();
    assert_eq!(parse_csv(&to_csv(&points)).unwrap(), points);
}

fn random_code(seed: u64) -> QuantumCode {
    let spec = initial_info_set(5, 0.07).unwrap();
    let groups = candidate_groups(&spec, None);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let t = mutate_precoder(&qpolar::Precoder::identity(32), &groups, 0.2, &mut rng);
    QuantumCode::new(spec, t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn code_file_round_trip(seed in any::<u64>(), fitness in 0.0f64..1.0) {
        let code = random_code(seed);
        let mut meta = BTreeMap::new();
        meta.insert("fitness".to_string(), serde_json::json!(fitness));
        let file = CodeFile::from_code(&code, meta);
        let text = file.render();
        let back = CodeFile::parse(&text).unwrap();
        prop_assert_eq!(back.render(), text);
        prop_assert_eq!(back.to_code().unwrap(), code);
    }

    #[test]
    fn decoded_noise_reproduces_syndrome(seed in any::<u64>(), symbols in proptest::collection::vec(0u8..4, 32)) {
        let code = random_code(seed);
        let noise = PauliVec::from_symbols(&symbols);
        let syndrome = measure_syndrome(&noise, &code).unwrap();
        let decoder = QuantumDecoder::new(&code, ChannelParam::new(0.1).unwrap(), 4).unwrap();
        let d = decoder.decode(&syndrome).unwrap();
        prop_assert_eq!(measure_syndrome(&d.noise, &code).unwrap(), syndrome);
    }
}
