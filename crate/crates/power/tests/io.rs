use std::path::Path;

use benders_power::io::parse_document;
use benders_power::{generate_synthetic, generate_toy_case, load_instance, write_instance, PowerError, SyntheticSpec, ToyCase, ToyParams};

#[test]
fn written_instances_load_back_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let synthetic = generate_synthetic(&SyntheticSpec {
        technologies: 8,
        ..SyntheticSpec::default()
    })
    .unwrap();
    for inst in [generate_toy_case(ToyCase::C, &ToyParams::default()), synthetic] {
        let path = write_instance(dir.path(), &inst).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);
    }
}

#[test]
fn malformed_json_reports_position() {
    let text = "{\n  \"name\": \"x\",\n  \"regions\": [\"a\",, ]\n}";
    match parse_document(text, Path::new("bad.json")) {
        Err(PowerError::Parse { line, column, .. }) => {
            assert_eq!(line, 3);
            assert!(column > 0);
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_toy_case(ToyCase::A, &ToyParams::default());
    let path = write_instance(dir.path(), &inst).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc["colour"] = "blue".into();
    std::fs::write(&path, doc.to_string()).unwrap();
    assert!(matches!(load_instance(&path), Err(PowerError::Parse { .. })));
}

#[test]
fn bad_profile_cells_name_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_toy_case(ToyCase::A, &ToyParams::default());
    let path = write_instance(dir.path(), &inst).unwrap();
    let csv = dir.path().join("case_a_profiles.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[3] = lines[3].replacen(",1,", ",one,", 1);
    std::fs::write(&csv, lines.join("\n")).unwrap();
    let err = load_instance(&path).unwrap_err().to_string();
    assert!(err.contains("row 4"), "{err}");
}

#[test]
fn storage_listed_as_technology_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_synthetic(&SyntheticSpec {
        technologies: 8,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let path = write_instance(dir.path(), &inst).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let storage = doc["storage"].as_array().unwrap()[0].clone();
    doc["technologies"].as_array_mut().unwrap().push(storage);
    doc["storage"] = serde_json::json!([]);
    std::fs::write(&path, doc.to_string()).unwrap();
    assert!(matches!(load_instance(&path), Err(PowerError::Data(_))));
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(load_instance(Path::new("/nonexistent/x.json")), Err(PowerError::Io { .. })));
}
