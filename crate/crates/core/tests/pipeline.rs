use qsskit::access::AccessStructure;
use qsskit::classify::{
    classify, lemma_r7_audit, r7_counting_holds, recheck_farkas, recheck_sample, run_pipeline, Certificate,
    ClassificationReport, Filter, PipelineOptions, StructureResult, Verdict,
};
use qsskit::codebook;
use qsskit::par::Exec;

fn run(n: usize) -> ClassificationReport {
    classify(n, false, PipelineOptions::default()).unwrap()
}

fn assert_certificates_recheck(report: &ClassificationReport) {
    for r in &report.results {
        if let Some(Certificate::Farkas { multipliers }) = &r.certificate {
            assert_eq!(recheck_farkas(&r.structure, multipliers), Ok(()), "{:?}", r.structure.to_lists());
        }
        if let Some(sample) = &r.lp_sample {
            assert_eq!(recheck_sample(&r.structure, sample), Ok(()), "{:?}", r.structure.to_lists());
        }
        match (&r.verdict, &r.certificate) {
            (Verdict::Eliminated { filter: Filter::F3 }, Some(Certificate::Farkas { .. })) => {}
            (Verdict::Eliminated { filter: Filter::F3 }, other) => panic!("F3 without Farkas: {other:?}"),
            (Verdict::Eliminated { .. }, None) => panic!("elimination without certificate"),
            (Verdict::Realized { .. }, Some(Certificate::Realization { max_deviation, .. })) => {
                assert!(*max_deviation < 1e-7)
            }
            (Verdict::Realized { .. }, _) => panic!("realization without certificate"),
            _ => {}
        }
    }
}

#[test]
fn small_registers() {
    let three = run(3);
    assert_eq!(three.results.len(), 1);
    assert_eq!(three.results[0].verdict, Verdict::Eliminated { filter: Filter::F2 });

    let four = run(4);
    assert_eq!(four.survivors().count(), 0);

    let five = run(5);
    let realized: Vec<_> = five.realized().collect();
    assert_eq!(realized.len(), 1);
    assert_eq!(realized[0].structure, AccessStructure::threshold(5, 3).unwrap());
    assert_eq!(five.survivors().count(), 1);

    let six = run(6);
    assert_eq!(six.results.len(), 23);
    assert_eq!(six.survivors().count(), 0);

    for report in [&three, &four, &five, &six] {
        assert_certificates_recheck(report);
        let counts = report.counts();
        let total: usize = counts.iter().filter(|(k, _)| k.as_str() != "enumerated").map(|(_, v)| v).sum();
        assert_eq!(total, counts["enumerated"]);
    }
}

#[test]
fn deterministic_and_execution_independent() {
    let strip = |mut r: ClassificationReport| {
        r.wall_time_secs = 0.0;
        r.to_json()
    };
    let sequential = PipelineOptions { exec: Exec::Sequential, ..Default::default() };
    let a = strip(classify(5, false, PipelineOptions::default()).unwrap());
    let b = strip(classify(5, false, PipelineOptions::default()).unwrap());
    let c = strip(classify(5, false, sequential).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn report_files() {
    let report = run(5);
    let dir = tempfile::tempdir().unwrap();
    report.write_to(dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["n_players"], 5);
    let structures = json["structures"].as_array().unwrap();
    assert_eq!(structures.len(), report.results.len());
    for entry in structures {
        if entry["verdict"] == "ELIMINATED" {
            let name = entry["certificate"].as_str().unwrap();
            let cert: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(dir.path().join(name)).unwrap()).unwrap();
            assert_eq!(cert["minimal_authorized"], entry["minimal_authorized"]);
            assert!(cert["kind"].is_string());
        }
    }
}

#[test]
fn known_structures_individually() {
    let structures = vec![
        AccessStructure::threshold(5, 3).unwrap(),
        AccessStructure::threshold(7, 4).unwrap(),
    ];
    let report = run_pipeline(&structures, 7, true, PipelineOptions::default());
    assert!(matches!(report.results[0].verdict, Verdict::Realized { .. }));
    assert_eq!(report.results[1].verdict, Verdict::Eliminated { filter: Filter::F2 });
}

fn realized(structure: AccessStructure) -> StructureResult {
    StructureResult {
        structure,
        verdict: Verdict::Realized { scheme: "synthetic".into() },
        reasons: Vec::new(),
        certificate: None,
        lp_sample: None,
    }
}

#[test]
fn r7_audit() {
    let fano = codebook::fano_structure();
    assert!(r7_counting_holds(&fano));
    let six_lines = AccessStructure::new(7, fano.minimal_sets()[..6].to_vec()).unwrap();
    assert!(!r7_counting_holds(&six_lines));

    let report = |r: Vec<StructureResult>| ClassificationReport {
        n_players: 7,
        homogeneous_only: true,
        results: r,
        wall_time_secs: 0.0,
    };
    assert!(lemma_r7_audit(&report(vec![realized(fano.clone())])));
    assert!(!lemma_r7_audit(&report(vec![realized(fano), realized(six_lines)])));
}
