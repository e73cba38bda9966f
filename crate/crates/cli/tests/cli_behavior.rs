//! Command-line contract: exit codes, determinism, config echo
//! round-trips, and output containment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gazemodal::dispatch;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["gazemodal".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    dispatch(argv)
}

fn collect_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]), 1);
    assert_eq!(run(&["no-such-command"]), 1);
    assert_eq!(run(&["gen-data", "--no-such-flag", "x"]), 1);
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["gen-data", "--help"]), 0);
}

#[test]
fn missing_dataset_path_is_a_data_error() {
    // no --out fallback either; dataset is checked first and must name
    // the missing flag
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let code = run(&["run-exp", "--arch", "IMG", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);

    let err = match gazemodal::commands::run_exp::run(gazemodal::commands::run_exp::RunExpArgs {
        config: None,
        dataset: None,
        embeddings: None,
        out: Some(out),
        arch: Some("IMG".into()),
        text_section: None,
        heatmap_loss: None,
        id: None,
        k: None,
        seed: None,
        epochs: None,
        batch_size: None,
        lr: None,
        channels: None,
        img_feature: None,
        text_feature: None,
        lstm_hidden: None,
        composites: None,
        save_models: None,
    }) {
        Err(e) => e,
        Ok(()) => panic!("expected a data error"),
    };
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("dataset"), "{err}");
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "n_studies = 10\nbogus_key = 1\n").unwrap();
    let out = dir.path().join("out");
    let code = run(&[
        "gen-data",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn gen_data_is_deterministic_and_contained() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let args = |out: &Path| {
        vec![
            "gen-data".to_string(),
            "--out".into(),
            out.display().to_string(),
            "--seed".into(),
            "7".into(),
            "--n-studies".into(),
            "12".into(),
            "--image-size".into(),
            "16".into(),
            "--corpus-reports".into(),
            "20".into(),
        ]
    };
    let mut argv_a = vec!["gazemodal".to_string()];
    argv_a.extend(args(&out_a));
    let mut argv_b = vec!["gazemodal".to_string()];
    argv_b.extend(args(&out_b));
    assert_eq!(dispatch(argv_a), 0);
    assert_eq!(dispatch(argv_b), 0);
    assert_eq!(collect_tree(&out_a), collect_tree(&out_b));

    // nothing written outside the two out directories
    let entries: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    let mut sorted = entries.clone();
    sorted.sort();
    assert_eq!(sorted, vec!["a".to_string(), "b".to_string()]);
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("first");
    let code = run(&[
        "gen-data",
        "--out",
        out_a.to_str().unwrap(),
        "--seed",
        "9",
        "--n-studies",
        "10",
        "--image-size",
        "16",
        "--corpus-reports",
        "15",
    ]);
    assert_eq!(code, 0);
    let echo = out_a.join("config.echo");
    assert!(echo.exists());
    let echo_text = fs::read_to_string(&echo).unwrap();
    assert!(echo_text.contains("seed = 9"), "{echo_text}");
    assert!(!echo_text.contains("out ="), "out must not be echoed: {echo_text}");

    let out_b = dir.path().join("second");
    let code = run(&[
        "gen-data",
        "--config",
        echo.to_str().unwrap(),
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(collect_tree(&out_a), collect_tree(&out_b));
}

#[test]
fn gazemodal_out_env_supplies_the_default_root() {
    // touched by a single test only, so the process-global env is safe
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var("GAZEMODAL_OUT", dir.path());
    let code = run(&[
        "gen-data",
        "--seed",
        "3",
        "--n-studies",
        "6",
        "--image-size",
        "16",
        "--corpus-reports",
        "5",
    ]);
    std::env::remove_var("GAZEMODAL_OUT");
    assert_eq!(code, 0);
    assert!(dir.path().join("dataset/manifest.csv").exists());
}

#[test]
fn eval_attn_scores_saved_maps() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert_eq!(
        run(&[
            "gen-data",
            "--out",
            data.to_str().unwrap(),
            "--seed",
            "11",
            "--n-studies",
            "18",
            "--image-size",
            "16",
            "--corpus-reports",
            "5",
        ]),
        0
    );
    // fabricate maps for the annotated studies: reuse their static maps
    let boxes = dataio::load_bounding_boxes(&data.join("boxes.csv")).unwrap();
    assert!(!boxes.is_empty());
    let records = dataio::load_dataset(&data.join("manifest.csv")).unwrap();
    let maps = dir.path().join("maps");
    fs::create_dir_all(&maps).unwrap();
    for record in &records {
        if boxes.contains_key(&record.study_id) {
            dataio::pgm::write_pgm(
                &maps.join(format!("{}.pgm", record.study_id)),
                &record.static_map,
            )
            .unwrap();
        }
    }
    let out = dir.path().join("scored");
    assert_eq!(
        run(&[
            "eval-attn",
            "--maps",
            maps.to_str().unwrap(),
            "--boxes",
            data.join("boxes.csv").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]),
        0
    );
    let text = fs::read_to_string(out.join("overlap.csv")).unwrap();
    assert!(text.starts_with("study_id,overlap"));
    assert!(text.contains("mean,"));
    assert!(text.contains("median,"));
}
