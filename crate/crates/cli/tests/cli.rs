mod common;

use std::path::Path;

use common::{qiedge, read_json, schema_errors, snapshot, without_volatile, write_suite};
use qiedge::io::{read_image, write_gray_png, write_pgm, write_rgb_png};
use qiedge::{GrayImage, PipelineConfig, RgbImage, Variant};
use qiedge_cli::settings::{Settings, UsageError};
use qiedge_cli::{parse_args, Invocation, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use serde_json::{json, Value};
use tempfile::TempDir;

fn gradient(w: usize, h: usize, phase: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| {
        if (x + phase) % 24 < 12 {
            40.0 + y as f64
        } else {
            210.0
        }
    })
    .unwrap()
}

fn manifest_settings(args: &[&str]) -> Result<Settings, UsageError> {
    let mut argv = vec!["qiedge"];
    argv.extend_from_slice(args);
    match parse_args(argv)? {
        Invocation::Run(m) => Ok(m.settings),
        Invocation::Synth(_) => panic!("expected a batch run"),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn detect_defaults() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.png");
    write_gray_png(&input, &gradient(8, 8, 0)).unwrap();
    let out = dir.path().join("out");
    let argv = [
        "qiedge",
        "detect",
        "--input",
        s(&input),
        "--output",
        s(&out),
    ];
    let Invocation::Run(m) = parse_args(argv).unwrap() else {
        panic!("expected a batch run")
    };
    assert_eq!(m.pipeline, PipelineConfig::default());
    assert_eq!(m.pipeline.variant, Variant::Full);
    assert_eq!(m.pipeline.diffusion.delta, 0.1);
    assert_eq!(m.pipeline.diffusion.time_steps, 10);
    assert_eq!((m.pipeline.blur.sigma, m.pipeline.blur.radius), (1.0, 1));
    assert_eq!(
        (m.pipeline.thresholds.low, m.pipeline.thresholds.high),
        (50.0, 150.0)
    );
    assert_eq!(m.images, vec![input]);
    assert_eq!(m.report, out.join("report.json"));
    assert!(m.warnings.is_empty());
}

#[test]
fn inverted_thresholds_are_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.png");
    write_gray_png(&input, &gradient(8, 8, 0)).unwrap();
    let out = dir.path().join("out");
    let args = [
        "detect",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--t-low",
        "150",
        "--t-high",
        "50",
    ];
    assert!(manifest_settings(&args).is_err());
    let run = qiedge(args);
    assert_eq!(run.code, i32::from(EXIT_USAGE), "{}", run.stderr);
    assert!(run.stderr.contains("low < high"), "{}", run.stderr);
    assert!(!out.exists());
}

/// Every tunable: default when unset, config value when only the config sets
/// it, flag value when both do.
#[test]
fn flag_beats_config_beats_default() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.png");
    write_gray_png(&input, &gradient(8, 8, 0)).unwrap();
    let out = dir.path().join("out");
    let (gt_a, gt_b) = (dir.path().join("gt_a"), dir.path().join("gt_b"));
    std::fs::create_dir_all(&gt_a).unwrap();
    std::fs::create_dir_all(&gt_b).unwrap();
    let (rep_a, rep_b) = (dir.path().join("a.json"), dir.path().join("b.json"));

    let cases: Vec<(&str, Value, Vec<&str>, Value)> = vec![
        (
            "variant",
            json!("hybrid"),
            vec!["--variant", "sobel"],
            json!("sobel"),
        ),
        ("delta", json!(0.2), vec!["--delta", "0.05"], json!(0.05)),
        ("time_steps", json!(3), vec!["--time-steps", "7"], json!(7)),
        (
            "stencil",
            json!("weighted"),
            vec!["--stencil", "four-neighbor"],
            json!("four-neighbor"),
        ),
        (
            "blur_sigma",
            json!(2.0),
            vec!["--blur-sigma", "0.7"],
            json!(0.7),
        ),
        (
            "blur_radius",
            json!(2),
            vec!["--blur-radius", "3"],
            json!(3),
        ),
        ("t_low", json!(20.0), vec!["--t-low", "30"], json!(30.0)),
        (
            "t_high",
            json!(200.0),
            vec!["--t-high", "180"],
            json!(180.0),
        ),
        (
            "binarize_at",
            json!(100.0),
            vec!["--binarize-at", "90"],
            json!(90.0),
        ),
        (
            "tolerance",
            json!(2.0),
            vec!["--tolerance", "1"],
            json!(1.0),
        ),
        (
            "threshold_levels",
            json!(10),
            vec!["--threshold-levels", "20"],
            json!(20),
        ),
        (
            "noise_sigmas",
            json!([5.0]),
            vec!["--noise-sigmas", "0,10"],
            json!([0.0, 10.0]),
        ),
        ("seed", json!(3), vec!["--seed", "9"], json!(9)),
        (
            "overlay_color",
            json!([0, 255, 0]),
            vec!["--overlay-color", "1,2,3"],
            json!([1, 2, 3]),
        ),
        ("threads", json!(2), vec!["--threads", "1"], json!(1)),
        (
            "gt",
            json!(s(&gt_a)),
            vec!["--gt", s(&gt_b)],
            json!(s(&gt_b)),
        ),
        (
            "report",
            json!(s(&rep_a)),
            vec!["--report", s(&rep_b)],
            json!(s(&rep_b)),
        ),
        ("thin", json!(false), vec!["--thin"], json!(true)),
        (
            "allow_same_dir",
            json!(false),
            vec!["--allow-same-dir"],
            json!(true),
        ),
    ];

    let default = serde_json::to_value(Settings::default()).unwrap();
    let base = ["detect", "--input", s(&input), "--output", s(&out)];
    for (key, cfg_value, flag, flag_value) in cases {
        let cfg_path = dir.path().join(format!("{key}.json"));
        std::fs::write(&cfg_path, json!({ key: cfg_value }).to_string()).unwrap();

        let plain = serde_json::to_value(manifest_settings(&base).unwrap()).unwrap();
        assert_eq!(plain[key], default[key], "{key}: default");

        let mut with_cfg = base.to_vec();
        with_cfg.extend(["--config", s(&cfg_path)]);
        let got = serde_json::to_value(manifest_settings(&with_cfg).unwrap()).unwrap();
        assert_eq!(got[key], cfg_value, "{key}: config");

        let mut with_both = with_cfg.clone();
        with_both.extend(flag.iter().copied());
        let got = serde_json::to_value(manifest_settings(&with_both).unwrap()).unwrap();
        assert_eq!(got[key], flag_value, "{key}: flag over config");
    }

    // Paths follow the same rule.
    let cfg_path = dir.path().join("paths.json");
    let other = dir.path().join("other_out");
    std::fs::write(
        &cfg_path,
        json!({ "input": [s(&input)], "output": s(&other) }).to_string(),
    )
    .unwrap();
    let got = manifest_settings(&["detect", "--config", s(&cfg_path)]).unwrap();
    assert_eq!(got.output.as_deref(), Some(other.as_path()));
    let got =
        manifest_settings(&["detect", "--config", s(&cfg_path), "--output", s(&out)]).unwrap();
    assert_eq!(got.output.as_deref(), Some(out.as_path()));
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.png");
    write_gray_png(&input, &gradient(8, 8, 0)).unwrap();
    let out = dir.path().join("out");
    let bad_cfg = dir.path().join("bad.json");
    std::fs::write(&bad_cfg, r#"{"delta": 0.1, "colour": 3}"#).unwrap();
    let not_json = dir.path().join("broken.json");
    std::fs::write(&not_json, "{delta").unwrap();
    let missing = dir.path().join("missing.png");

    let nope = dir.path().join("nope.json");
    let no_gt = dir.path().join("no_gt_dir");
    let base = ["detect", "--input", s(&input), "--output", s(&out)];
    let with = |extra: &[&'static str]| -> Vec<String> {
        base.iter().chain(extra).map(|a| a.to_string()).collect()
    };
    let owned = |v: &[&str]| -> Vec<String> { v.iter().map(|a| a.to_string()).collect() };
    let cases: Vec<Vec<String>> = vec![
        with(&["--bogus"]),
        [&base[..], &["--config", s(&bad_cfg)]]
            .concat()
            .iter()
            .map(|a| a.to_string())
            .collect(),
        [&base[..], &["--config", s(&not_json)]]
            .concat()
            .iter()
            .map(|a| a.to_string())
            .collect(),
        [&base[..], &["--config", s(&nope)]]
            .concat()
            .iter()
            .map(|a| a.to_string())
            .collect(),
        with(&["--variant", "canny"]),
        with(&["--delta", "0"]),
        with(&["--delta", "-0.1"]),
        with(&["--blur-sigma", "0"]),
        with(&["--blur-radius", "0"]),
        with(&["--tolerance", "-1"]),
        with(&["--noise-sigmas", "10,-5"]),
        with(&["--threads", "0"]),
        with(&["--overlay-color", "300,0,0"]),
        with(&["--threshold-levels", "0"]),
        [&base[..], &["--gt", s(&no_gt)]]
            .concat()
            .iter()
            .map(|a| a.to_string())
            .collect(),
        owned(&["detect", "--input", s(&missing), "--output", s(&out)]),
        owned(&["detect", "--output", s(&out)]),
        owned(&["detect", "--input", s(&input)]),
        owned(&["ablate", "--input", s(&input), "--output", s(&out)]),
        owned(&["frobnicate"]),
        owned(&["synth", "--output", s(&out), "--size", "4"]),
    ];
    for args in cases {
        let run = qiedge(&args);
        assert_eq!(run.code, i32::from(EXIT_USAGE), "{args:?}: {}", run.stderr);
        assert!(run.stderr.starts_with("error:"), "{args:?}: {}", run.stderr);
    }
    assert!(!out.exists());
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let run = qiedge([flag]);
        assert_eq!(run.code, 0);
        assert!(!run.stdout.is_empty());
    }
    let run = qiedge(["detect", "--help"]);
    assert!(run.stdout.contains("--noise-sigmas"));
}

#[test]
fn directory_of_three_pngs() {
    let dir = TempDir::new().unwrap();
    let inputs = dir.path().join("in");
    std::fs::create_dir_all(&inputs).unwrap();
    for (i, (w, h)) in [(40, 30), (33, 33), (16, 48)].into_iter().enumerate() {
        write_gray_png(inputs.join(format!("img{i}.png")), &gradient(w, h, i)).unwrap();
    }
    std::fs::write(inputs.join("notes.txt"), "not an image").unwrap();
    let out = dir.path().join("out");

    let run = qiedge(["detect", "--input", s(&inputs), "--output", s(&out)]);
    assert_eq!(run.code, i32::from(EXIT_OK), "{}", run.stderr);
    let report = read_json(&out.join("report.json"));
    assert_eq!(schema_errors(&report), Vec::<String>::new());
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["images"].as_array().unwrap().len(), 3);
    assert!(report["evaluation"].is_null());
    assert!(report["noise_sweep"].is_null());
    assert!(report["failures"].as_array().unwrap().is_empty());
    for rec in report["images"].as_array().unwrap() {
        let edge = read_image(rec["edge_map"].as_str().unwrap()).unwrap();
        let src = read_image(rec["input"].as_str().unwrap()).unwrap();
        assert_eq!(edge.dims(), src.dims());
        assert_eq!(
            edge.dims(),
            (
                rec["width"].as_u64().unwrap() as usize,
                rec["height"].as_u64().unwrap() as usize
            )
        );
        assert!(matches!(edge, qiedge::io::InputImage::Gray(_)));
    }
    let timings = report["volatile"]["images"].as_array().unwrap();
    assert_eq!(timings.len(), 3);
    assert!(timings[0]["stage_times"]["total"].as_f64().unwrap() >= 0.0);
}

#[test]
fn partial_and_total_failure_exit_two() {
    let dir = TempDir::new().unwrap();
    let inputs = dir.path().join("in");
    std::fs::create_dir_all(&inputs).unwrap();
    write_gray_png(inputs.join("good1.png"), &gradient(20, 20, 0)).unwrap();
    write_gray_png(inputs.join("good2.png"), &gradient(20, 20, 5)).unwrap();
    std::fs::write(inputs.join("broken.png"), b"\x89PNG garbage").unwrap();
    let out = dir.path().join("out");

    let run = qiedge(["detect", "--input", s(&inputs), "--output", s(&out)]);
    assert_eq!(run.code, i32::from(EXIT_FAILURE));
    let report = read_json(&out.join("report.json"));
    assert_eq!(schema_errors(&report), Vec::<String>::new());
    assert_eq!(report["images"].as_array().unwrap().len(), 2);
    let failures = report["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0]["stage"], "decode");
    assert!(failures[0]["input"]
        .as_str()
        .unwrap()
        .ends_with("broken.png"));

    let only_bad = dir.path().join("bad");
    std::fs::create_dir_all(&only_bad).unwrap();
    std::fs::write(only_bad.join("x.png"), b"nope").unwrap();
    let out2 = dir.path().join("out2");
    let run = qiedge(["detect", "--input", s(&only_bad), "--output", s(&out2)]);
    assert_eq!(run.code, i32::from(EXIT_FAILURE));
    let report = read_json(&out2.join("report.json"));
    assert!(report["images"].as_array().unwrap().is_empty());
}

#[test]
fn missing_ground_truth_is_a_per_image_failure() {
    let dir = TempDir::new().unwrap();
    let (images, gt) = write_suite(dir.path(), 48);
    std::fs::remove_file(gt.join("disk.png")).unwrap();
    let out = dir.path().join("out");
    let run = qiedge([
        "detect",
        "--input",
        s(&images),
        "--gt",
        s(&gt),
        "--output",
        s(&out),
    ]);
    assert_eq!(run.code, i32::from(EXIT_FAILURE));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["failures"][0]["stage"], "ground-truth");
    assert_eq!(report["evaluation"]["images"].as_array().unwrap().len(), 3);
    assert_eq!(schema_errors(&report), Vec::<String>::new());
}

#[test]
fn output_must_not_be_an_input_directory() {
    let dir = TempDir::new().unwrap();
    let inputs = dir.path().join("in");
    std::fs::create_dir_all(&inputs).unwrap();
    let file = inputs.join("a.png");
    write_gray_png(&file, &gradient(12, 12, 0)).unwrap();

    for input in [&inputs, &file] {
        let run = qiedge(["detect", "--input", s(input), "--output", s(&inputs)]);
        assert_eq!(run.code, i32::from(EXIT_USAGE), "{}", run.stderr);
    }
    let run = qiedge([
        "detect",
        "--input",
        s(&file),
        "--output",
        s(&inputs),
        "--allow-same-dir",
    ]);
    assert_eq!(run.code, i32::from(EXIT_OK), "{}", run.stderr);
    assert!(inputs.join("a_edges.png").is_file());
}

#[test]
fn color_and_pgm_inputs_with_overlays() {
    let dir = TempDir::new().unwrap();
    let inputs = dir.path().join("in");
    std::fs::create_dir_all(&inputs).unwrap();
    let rgb = RgbImage::new(
        24,
        16,
        (0..24 * 16 * 3)
            .map(|i| if (i / 3) % 24 < 12 { 30.0 } else { 220.0 })
            .collect(),
    )
    .unwrap();
    write_rgb_png(inputs.join("color.png"), &rgb).unwrap();
    write_pgm(inputs.join("plain.pgm"), &gradient(20, 10, 3)).unwrap();
    let out = dir.path().join("out");

    let run = qiedge([
        "detect",
        "--input",
        s(&inputs),
        "--output",
        s(&out),
        "--overlay-color",
        "255,0,0",
    ]);
    assert_eq!(run.code, i32::from(EXIT_OK), "{}", run.stderr);
    let report = read_json(&out.join("report.json"));
    assert_eq!(schema_errors(&report), Vec::<String>::new());
    let recs = report["images"].as_array().unwrap();
    assert_eq!(recs[0]["channels"], 3);
    assert_eq!(recs[1]["channels"], 1);
    for rec in recs {
        let overlay = read_image(rec["overlay"].as_str().unwrap()).unwrap();
        let qiedge::io::InputImage::Rgb(o) = overlay else {
            panic!("overlay is not RGB")
        };
        assert_eq!(
            o.dims(),
            (
                rec["width"].as_u64().unwrap() as usize,
                rec["height"].as_u64().unwrap() as usize
            )
        );
        let painted = (0..o.height())
            .flat_map(|y| (0..o.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| o.pixel(x, y) == [255.0, 0.0, 0.0])
            .count();
        assert_eq!(
            painted,
            rec["edges"]["edge_pixels"].as_u64().unwrap() as usize
        );
    }
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let (images, gt) = write_suite(dir.path(), 48);
    let out = dir.path().join("out");
    let run = qiedge([
        "detect",
        "--input",
        s(&images),
        "--gt",
        s(&gt),
        "--output",
        s(&out),
        "--noise-sigmas",
        "0,15",
        "--seed",
        "11",
        "--variant",
        "hybrid",
        "--time-steps",
        "4",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let first = read_json(&out.join("report.json"));
    let files = snapshot(&out);

    let cfg = dir.path().join("echo.json");
    std::fs::write(&cfg, first["config"].to_string()).unwrap();
    std::fs::remove_dir_all(&out).unwrap();
    let run = qiedge(["detect", "--config", s(&cfg)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let second = read_json(&out.join("report.json"));
    assert_eq!(without_volatile(&first), without_volatile(&second));
    let again = snapshot(&out);
    for (path, bytes) in &files {
        if path.file_name().unwrap() != "report.json" {
            assert_eq!(Some(bytes), again.get(path), "{}", path.display());
        }
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = TempDir::new().unwrap();
    let (images, gt) = write_suite(dir.path(), 48);
    let mut reports = Vec::new();
    let mut maps = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("out{threads}"));
        let run = qiedge([
            "detect",
            "--input",
            s(&images),
            "--gt",
            s(&gt),
            "--output",
            s(&out),
            "--threads",
            threads,
        ]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        let r = read_json(&out.join("report.json"));
        assert_eq!(
            r["volatile"]["threads"].as_u64().unwrap(),
            threads.parse::<u64>().unwrap()
        );
        let mut r = without_volatile(&r);
        r.as_object_mut().unwrap().remove("config");
        for rec in r["images"].as_array_mut().unwrap() {
            rec.as_object_mut().unwrap().remove("edge_map");
        }
        reports.push(r);
        maps.push(
            snapshot(&out)
                .into_iter()
                .filter(|(p, _)| p.extension().is_some_and(|e| e == "png"))
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(maps[0], maps[1]);
}

#[test]
fn ablation_runs_all_variants() {
    let dir = TempDir::new().unwrap();
    let (images, gt) = write_suite(dir.path(), 48);
    let out = dir.path().join("out");
    let run = qiedge([
        "ablate",
        "--input",
        s(&images),
        "--gt",
        s(&gt),
        "--output",
        s(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = read_json(&out.join("report.json"));
    assert_eq!(schema_errors(&report), Vec::<String>::new());
    let rows = report["ablation"].as_array().unwrap();
    let names: Vec<&str> = rows
        .iter()
        .map(|r| r["variant"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["sobel", "schrodinger-sobel", "hybrid", "full"]);
    for v in &names {
        assert!(out.join(v).join("disk_edges.png").is_file());
    }
    assert_eq!(report["images"].as_array().unwrap().len(), 16);
    for name in names {
        assert!(run.stdout.contains(name));
    }
}

#[test]
fn unstable_delta_warns() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.png");
    write_gray_png(&input, &gradient(16, 16, 0)).unwrap();
    let out = dir.path().join("out");
    let run = qiedge([
        "detect",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--delta",
        "0.3",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stderr.contains("warning: delta 0.3"), "{}", run.stderr);
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn synth_writes_the_suite() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("suite");
    let run = qiedge(["synth", "--output", s(&out), "--size", "32"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    for sample in qiedge::synthetic::suite(32) {
        for sub in ["images", "gt"] {
            let p = out.join(sub).join(format!("{}.png", sample.name));
            assert_eq!(read_image(&p).unwrap().dims(), (32, 32));
        }
    }
}

#[test]
fn duplicate_stems_are_rejected_per_image() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    std::fs::create_dir_all(&a).unwrap();
    std::fs::create_dir_all(&b).unwrap();
    write_gray_png(a.join("x.png"), &gradient(10, 10, 0)).unwrap();
    write_pgm(b.join("x.pgm"), &gradient(10, 10, 1)).unwrap();
    let out = dir.path().join("out");
    let run = qiedge(["detect", "--input", s(&a), s(&b), "--output", s(&out)]);
    assert_eq!(run.code, i32::from(EXIT_FAILURE));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["images"].as_array().unwrap().len(), 1);
    assert_eq!(report["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn schema_rejects_malformed_reports() {
    let dir = TempDir::new().unwrap();
    let (images, gt) = write_suite(dir.path(), 32);
    let out = dir.path().join("out");
    let run = qiedge([
        "detect",
        "--input",
        s(&images),
        "--gt",
        s(&gt),
        "--output",
        s(&out),
    ]);
    assert_eq!(run.code, i32::from(EXIT_OK), "{}", run.stderr);
    let report = read_json(&out.join("report.json"));
    assert!(schema_errors(&report).is_empty());

    let tamper: [(&str, fn(&mut Value)); 6] = [
        ("extra top-level key", |r| r["extra"] = json!(1)),
        ("missing volatile", |r| {
            r.as_object_mut().unwrap().remove("volatile");
        }),
        ("score above one", |r| r["evaluation"]["ods"] = json!(1.5)),
        ("extra score key", |r| r["evaluation"]["bogus"] = json!(0.5)),
        ("unknown variant", |r| {
            r["images"][0]["variant"] = json!("canny")
        }),
        ("bad stage", |r| {
            r["failures"] = json!([{
                "input": "x", "stage": "warp", "variant": null,
                "noise_sigma": null, "error": "e"
            }])
        }),
    ];
    for (what, f) in tamper {
        let mut r = report.clone();
        f(&mut r);
        assert!(!schema_errors(&r).is_empty(), "{what} accepted");
    }
}
