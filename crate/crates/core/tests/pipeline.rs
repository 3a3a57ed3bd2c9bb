use kpell::pipeline::{run_full_pipeline, PipelineConfig, PipelineReport, RunOptions};
use kpell::Error;

fn small() -> PipelineConfig {
    PipelineConfig { k_max: 6, k_stride: 2, ell_stride: 40, case2: false, ..PipelineConfig::default() }
}

fn run(cfg: &PipelineConfig, options: &RunOptions) -> PipelineReport {
    run_full_pipeline(cfg, options).unwrap()
}

#[test]
fn reports_are_deterministic_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("cells.jsonl");
    let path = dir.path().join("report.json");
    let cfg = small();

    let plain = run(&cfg, &RunOptions::default()).without_timings();
    let first = run(&cfg, &RunOptions { checkpoint: Some(ck.clone()), report: Some(path.clone()) }).without_timings();
    assert_eq!(plain, first);
    let lines = std::fs::read_to_string(&ck).unwrap().lines().count();

    // Everything is served from the checkpoint on the second pass.
    let resumed = run(&cfg, &RunOptions { checkpoint: Some(ck.clone()), report: None }).without_timings();
    assert_eq!(first, resumed);
    assert_eq!(std::fs::read_to_string(&ck).unwrap().lines().count(), lines);

    let on_disk: PipelineReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(on_disk.without_timings(), first);

    let c1 = first.case1.as_ref().unwrap();
    assert!(c1.cells_failed.is_empty());
    assert_eq!(c1.ell_stage.cells, 5 * 9);
    assert_eq!(c1.n_cap, 6 * (2 * c1.ell_cap + c1.m_cap) + 2);
    let found: Vec<_> = first.matches.iter().map(|m| (m.k, m.n)).collect();
    assert_eq!(found, vec![(3, 8), (5, 7)]);
    // Case II was skipped, so the run cannot establish the theorem.
    assert!(!first.verdict.holds);
    assert!(first.assert_theorem().is_err());
}

#[test]
fn torn_checkpoint_is_repaired() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("cells.jsonl");
    let cfg = PipelineConfig { search: false, ..small() };
    let clean = run(&cfg, &RunOptions::default()).without_timings();
    run(&cfg, &RunOptions { checkpoint: Some(ck.clone()), report: None });

    // Drop the last half of the file, cutting a line in two.
    let text = std::fs::read_to_string(&ck).unwrap();
    std::fs::write(&ck, &text[..text.len() / 2]).unwrap();
    let again = run(&cfg, &RunOptions { checkpoint: Some(ck.clone()), report: None }).without_timings();
    assert_eq!(clean, again);
}

#[test]
fn checkpoint_from_another_config_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("cells.jsonl");
    let cfg = PipelineConfig { search: false, case1: false, case2: false, ..small() };
    run(&cfg, &RunOptions { checkpoint: Some(ck.clone()), report: None });
    let other = PipelineConfig { k_max: 7, ..cfg };
    let err = run_full_pipeline(&other, &RunOptions { checkpoint: Some(ck), report: None }).unwrap_err();
    assert!(matches!(err.root(), Error::Domain(_)), "{err}");
}
