use qsep_bench::{density, pru_fixture, purifier};
use qsep_core::adversary::attack_pru;
use qsep_core::oracle::Oracles;
use qsep_core::Budget;

#[test]
fn fixtures_are_deterministic() {
    assert_eq!(density(2, 3), density(2, 3));
    assert_eq!(purifier(2).matrix(), purifier(2).matrix());
}

#[test]
fn pru_fixture_runs_a_successful_attack() {
    let (fam, cand, cfg) = pru_fixture();
    let r = attack_pru(&cand, &Oracles::swap(&fam), &cfg, &Budget::default()).unwrap();
    assert!(r.advantage >= 0.9, "{}", r.advantage);
}
