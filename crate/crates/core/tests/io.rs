use gridforge::algorithms::{solve_sbd, AlgoParams, Problem};
use gridforge::fixtures::{tri3, tri3_dominance};
use gridforge::formulation::Design;
use gridforge::io::{
    design_from_file, design_to_file, instance_from_json, instance_to_json, parse_versioned, report_to_csv,
    report_to_json, scenarios_from_json, scenarios_to_json, DesignFile, InstanceFile, IoError, REPORT_CSV_HEADER,
};
use gridforge::io::save_results;
use gridforge::scenario::{sample_scenarios, DamageModel};
use gridforge::synthetic::{generate_synthetic, Profile};
use gridforge::{load_instance, random_case, DEFAULT_MAX_CYCLES};
use proptest::prelude::*;

#[test]
fn tri3_round_trips_with_embedded_scenarios() {
    let (inst, set) = tri3_dominance();
    let text = instance_to_json(&inst, Some(&set));
    let (back, scenarios) = instance_from_json(&text).unwrap();
    assert_eq!(back, inst);
    assert_eq!(scenarios.unwrap(), set);
    assert_eq!(instance_to_json(&back, Some(&set)), text);
}

#[test]
fn truncated_file_names_the_section() {
    let text = instance_to_json(&tri3(), None);
    let cut = &text[..text.find("\"e02\"").unwrap() + 3];
    match instance_from_json(cut) {
        Err(IoError::Parse { section, line, .. }) => {
            assert!(section.starts_with("edges"), "{section}");
            assert!(line > 1);
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn wrong_field_type_names_the_field() {
    let text = instance_to_json(&tri3(), None).replacen("\"length_miles\": 1.0", "\"length_miles\": \"long\"", 1);
    match instance_from_json(&text) {
        Err(IoError::Parse { section, .. }) => assert_eq!(section, "edges[0].length_miles"),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn schema_version_is_checked_first() {
    let text = instance_to_json(&tri3(), None).replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
    assert!(matches!(
        instance_from_json(&text),
        Err(IoError::SchemaVersionMismatch { found: Some(2), expected: 1 })
    ));
    assert!(matches!(
        parse_versioned::<InstanceFile>("{\"name\": \"x\"}"),
        Err(IoError::SchemaVersionMismatch { found: None, .. })
    ));
}

#[test]
fn unknown_edge_in_scenario_file_is_rejected() {
    let (inst, set) = tri3_dominance();
    let text = scenarios_to_json(&inst, &set).replacen("\"e02\"", "\"e99\"", 1);
    assert!(matches!(scenarios_from_json(&inst, &text), Err(IoError::Grid(_))));
}

#[test]
fn design_file_lists_upgrades_only() {
    let inst = tri3();
    let mut design = Design::existing(&inst);
    design.hardened[1] = true;
    design.switch_built[0] = true;
    design.facility_built[1] = true;
    design.new_capacity[1] = [1.5, 0.0, 0.0];
    let file = design_to_file(&inst, &design);
    assert_eq!(file.hardened, vec!["e02".to_string()]);
    assert_eq!(file.switches_built, vec!["e01".to_string()]);
    assert!(file.lines_built.is_empty());
    assert_eq!(design_from_file(&inst, &file).unwrap(), design);
    let bad = DesignFile {
        schema_version: 1,
        hardened: vec!["nope".into()],
        ..DesignFile::default()
    };
    assert!(design_from_file(&inst, &bad).is_err());
}

#[test]
fn report_csv_has_summary_plus_one_row_per_scenario() {
    let (inst, set) = tri3_dominance();
    let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
    let report = solve_sbd(&p, &AlgoParams::default()).unwrap();
    let csv = report_to_csv(&report, false).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 1 + 3);
    assert_eq!(lines[0], REPORT_CSV_HEADER.join(","));
    assert_eq!(lines[1], "summary,,10,,optimal,,,");
    assert!(lines[2].starts_with("scenario,0,"));
    // without timing the JSON holds no wall time
    assert!(!report_to_json(&inst, &report, false).contains("wall_time"));
    assert!(report_to_json(&inst, &report, true).contains("wall_time_seconds"));
}

#[test]
fn results_are_written_as_json_and_csv() {
    let (inst, set) = tri3_dominance();
    let p = Problem::new(&inst, &set, DEFAULT_MAX_CYCLES).unwrap();
    let report = solve_sbd(&p, &AlgoParams::default()).unwrap();
    let dir = std::env::temp_dir().join(format!("gridforge-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    save_results(&path, &inst, &report, false).unwrap();
    assert!(std::fs::read_to_string(dir.join("report.csv")).unwrap().starts_with("row,"));
    assert!(matches!(load_instance(&path), Err(IoError::Parse { .. })));
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_instances_round_trip(seed in any::<u64>()) {
        let (inst, set) = random_case(seed);
        let (back, scenarios) = instance_from_json(&instance_to_json(&inst, Some(&set))).unwrap();
        prop_assert_eq!(back, inst);
        prop_assert_eq!(scenarios.unwrap(), set);
    }
}

/// Walks `value` against the shipped schema, checking that every object key
/// is declared and every required key present.
fn conforms(schema: &serde_json::Value, node: &serde_json::Value, value: &serde_json::Value, at: &str) {
    use serde_json::Value;
    if let Some(r) = node.get("$ref").and_then(Value::as_str) {
        let name = r.trim_start_matches("#/$defs/");
        return conforms(schema, &schema["$defs"][name], value, at);
    }
    if let Some(branches) = node.get("oneOf").and_then(Value::as_array) {
        let kind = &value["kind"];
        let branch = branches.iter().find(|b| &b["properties"]["kind"]["const"] == kind);
        return conforms(schema, branch.unwrap_or_else(|| panic!("{at}: no branch for {kind}")), value, at);
    }
    if let Some(c) = node.get("const") {
        assert_eq!(value, c, "{at}");
    }
    match value {
        Value::Object(map) => {
            let props = node["properties"].as_object().unwrap_or_else(|| panic!("{at}: not an object"));
            for key in node.get("required").and_then(Value::as_array).into_iter().flatten() {
                assert!(map.contains_key(key.as_str().unwrap()), "{at}: missing {key}");
            }
            for (k, v) in map {
                let sub = props.get(k).unwrap_or_else(|| panic!("{at}.{k} is not in the schema"));
                conforms(schema, sub, v, &format!("{at}.{k}"));
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                conforms(schema, &node["items"], v, &format!("{at}[{i}]"));
            }
        }
        _ => {}
    }
}

#[test]
fn written_instances_follow_the_shipped_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../schema/instance.schema.json")).unwrap();
    let mut inst = generate_synthetic(Profile::Rural, 2, 4, 3).unwrap();
    inst.edges[0].is_transformer = true;
    inst.edges[1].phase_imbalance_limit = Some(0.2);
    let model = DamageModel {
        per_mile_probability: 0.3,
        hardened_rate_ratio: 0.5,
        rng_seed: 1,
    };
    let sampled = sample_scenarios(&inst, &model, 4).unwrap();
    let (tri, user) = tri3_dominance();
    for text in [instance_to_json(&inst, Some(&sampled)), instance_to_json(&tri, Some(&user))] {
        conforms(&schema, &schema, &serde_json::from_str(&text).unwrap(), "$");
    }
}
