use std::io::BufReader;
use std::path::{Path, PathBuf};

use codec_core::context::*;
use codec_core::Error;
use proptest::prelude::*;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn mj_files(dir: &Path) -> Vec<PathBuf> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "mj"))
        .collect();
    paths.sort();
    paths
}

fn fixture_classes() -> Vec<ClassUnit> {
    mj_files(&fixtures().join("corpus"))
        .iter()
        .flat_map(|p| parse_source(&std::fs::read_to_string(p).unwrap()).unwrap())
        .collect()
}

fn query(name: &str) -> ClassUnit {
    let text = std::fs::read_to_string(fixtures().join("queries").join(name)).unwrap();
    let mut units = parse_source(&text).unwrap();
    assert_eq!(units.len(), 1);
    units.pop().unwrap()
}

fn toks(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn gui_query_bundle() {
    let unit = query("MyGuiAppl.mj");
    assert_eq!(unit.methods.len(), 1);
    let target = find_hole(&unit).unwrap();
    let b = extract_context(&unit, target).unwrap();
    assert_eq!(
        b.get(EvidenceType::ClassName),
        &[toks(&["my", "gui", "appl"])]
    );
    assert_eq!(
        b.get(EvidenceType::Javadoc),
        &[toks(&["create", "a", "new", "frame"])]
    );
    assert_eq!(b.get(EvidenceType::ReturnType), &[toks(&["JFrame"])]);
    assert_eq!(b.get(EvidenceType::FormalParams), &[toks(&["a"])]);
    assert!(b.get(EvidenceType::MethodName).is_empty());
    assert!(b.get(EvidenceType::ApiCalls).is_empty());
    assert!(b.get(EvidenceType::ApiSequences).is_empty());
    assert_eq!(b.instance_count(), 4);
}

#[test]
fn bare_hole_class_has_only_its_name() {
    let unit = parse_source("class Lonely { ? ?() { __CODE_SEARCH__ } }")
        .unwrap()
        .remove(0);
    let b = extract_context(&unit, 0).unwrap();
    for (ty, inst) in b.iter() {
        if ty == EvidenceType::ClassName {
            assert_eq!(inst, &[toks(&["lonely"])]);
        } else {
            assert!(inst.is_empty(), "{ty} not empty");
        }
    }
}

#[test]
fn io_query_sees_read_fully_sequence() {
    let unit = query("IO.mj");
    let target = find_hole(&unit).unwrap();
    assert_eq!(unit.methods[target].name.as_deref(), Some("findMe"));
    let b = extract_context(&unit, target).unwrap();
    assert!(b
        .get(EvidenceType::SurroundingApiSequences)
        .contains(&toks(&["InputStream.read(byte[],int,int)"])));
    assert_eq!(
        b.get(EvidenceType::SurroundingMethodNames),
        &[toks(&["read", "fully"])]
    );
    assert_eq!(
        b.get(EvidenceType::SurroundingFormals),
        &[
            toks(&["InputStream", "fd"]),
            toks(&["byte[]", "dst"]),
            toks(&["int", "off"]),
            toks(&["int", "len"])
        ]
    );
    assert_eq!(
        b.get(EvidenceType::FormalParams),
        &[toks(&["OutputStream", "out"])]
    );
    assert_eq!(b.get(EvidenceType::MethodName), &[toks(&["find", "me"])]);
}

#[test]
fn hole_lookup_errors() {
    assert!(matches!(
        find_hole(&query("NoHole.mj")),
        Err(Error::AmbiguousQuery(0))
    ));
    assert!(matches!(
        find_hole(&query("TwoHoles.mj")),
        Err(Error::AmbiguousQuery(2))
    ));
    let unit = query("NoHole.mj");
    assert!(matches!(
        extract_context(&unit, 5),
        Err(Error::TargetOutOfRange { index: 5, len: 1 })
    ));
}

#[test]
fn camel_case_examples() {
    assert_eq!(split_camel_case("readFully"), toks(&["read", "fully"]));
    assert_eq!(split_camel_case("MyGuiAppl"), toks(&["my", "gui", "appl"]));
    assert_eq!(split_camel_case("a"), toks(&["a"]));
}

#[test]
fn fixture_corpus_parses() {
    let classes = fixture_classes();
    assert!(classes.len() >= 30, "{} classes", classes.len());
    assert!(classes.iter().all(|c| !c.methods.is_empty()));
}

#[test]
fn printing_is_idempotent_on_fixture_corpus() {
    for p in mj_files(&fixtures().join("corpus"))
        .iter()
        .chain(&mj_files(&fixtures().join("queries")))
    {
        let units = parse_source(&std::fs::read_to_string(p).unwrap()).unwrap();
        let once = print_source(&units);
        let reparsed = parse_source(&once).unwrap();
        assert_eq!(print_source(&reparsed), once, "{}", p.display());
    }
}

/// Every bundle token is lowercase except type names, which keep their case.
#[test]
fn identifier_tokens_are_lowercase() {
    let type_carrying = [
        EvidenceType::ClassTypes,
        EvidenceType::SurroundingReturnTypes,
        EvidenceType::SurroundingFormals,
        EvidenceType::SurroundingApiSequences,
        EvidenceType::ApiCalls,
        EvidenceType::ApiSequences,
        EvidenceType::ReturnType,
        EvidenceType::FormalParams,
        EvidenceType::Types,
    ];
    for unit in fixture_classes() {
        for m in 0..unit.methods.len() {
            let b = extract_context(&unit, m).unwrap();
            for (ty, insts) in b.iter() {
                for inst in insts {
                    assert!(inst.iter().all(|t| !t.is_empty()));
                    if !type_carrying.contains(&ty) {
                        assert!(
                            inst.iter().all(|t| *t == t.to_lowercase()),
                            "{ty}: {inst:?}"
                        );
                    }
                }
            }
            assert_eq!(b, extract_context(&unit, m).unwrap());
        }
    }
}

#[test]
fn hole_bodies_contribute_no_body_evidence() {
    for unit in fixture_classes() {
        for m in 0..unit.methods.len() {
            let q = extract_query_context(&unit, m).unwrap();
            for ty in EvidenceType::ALL
                .into_iter()
                .filter(|t| t.is_body_derived())
            {
                assert!(q.get(ty).is_empty(), "{}.{m}: {ty}", unit.name);
            }
            let full = extract_context(&unit, m).unwrap();
            for ty in EvidenceType::ALL
                .into_iter()
                .filter(|t| !t.is_body_derived())
            {
                assert_eq!(q.get(ty), full.get(ty));
            }
        }
    }
}

/// The checked-in JSON-lines fixture equals what the parser path produces.
#[test]
fn jsonl_fixture_matches_parser_path() {
    let records = records_from_units(&fixture_classes(), 0, false).unwrap();
    let file = std::fs::File::open(fixtures().join("fixture.jsonl")).unwrap();
    let stored = read_jsonl(BufReader::new(file)).unwrap();
    assert_eq!(stored, records);
    let mut buf = Vec::new();
    write_jsonl(&records, &mut buf).unwrap();
    assert_eq!(read_jsonl(&buf[..]).unwrap(), records);
}

#[test]
fn malformed_sources_report_positions() {
    let err = parse_source("class A {\n  void f() {\n    x();\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    assert!(parse_source("class A {}").unwrap()[0].methods.is_empty());
    let err = read_jsonl("{\"id\": 1}\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
}

proptest! {
    #[test]
    fn camel_split_is_lowercase_and_nonempty(ident in "[A-Za-z][A-Za-z0-9_]{0,20}") {
        let parts = split_camel_case(&ident);
        prop_assert!(parts.iter().all(|p| !p.is_empty() && *p == p.to_lowercase()));
        let letters: String = ident.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        prop_assert_eq!(parts.concat(), letters);
    }
}
