mod support;


use codemorph::{parse_file, parse_text, reconstruct_bytes, Language, SourceFile};
use proptest::prelude::*;

fn corpus() -> Vec<(std::path::PathBuf, Language)> {
    let mut files: Vec<_> = std::fs::read_dir(support::fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let lang = Language::from_extension(&p).unwrap();
            (p, lang)
        })
        .collect()
}

#[test]
fn corpus_round_trips_byte_for_byte() {
    let files = corpus();
    assert!(files.len() >= 20);
    for (path, lang) in files {
        let bytes = std::fs::read(&path).unwrap();
        let ctx = parse_file(&SourceFile::from_bytes(&path, lang, &bytes)).unwrap();
        assert_eq!(reconstruct_bytes(&ctx), bytes, "{}", path.display());
    }
}

/// Counts function definitions the way a reader would: every
/// `function_definition` node not nested inside another function or a class
/// body. `None` when the text does not parse cleanly.
fn independent_count(text: &str, lang: Language) -> Option<usize> {
    let mut parser = tree_sitter::Parser::new();
    let grammar: tree_sitter::Language = match lang {
        Language::C => tree_sitter_c::LANGUAGE.into(),
        Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
    };
    parser.set_language(&grammar).unwrap();
    let tree = parser.parse(text, None).unwrap();
    fn declares_function(node: tree_sitter::Node) -> bool {
        if node.kind() == "function_declarator" {
            return true;
        }
        let mut cursor = node.walk();
        let found = node.named_children(&mut cursor).any(declares_function);
        found
    }
    fn walk(node: tree_sitter::Node, count: &mut usize) {
        match node.kind() {
            "function_definition" => {
                if node.child_by_field_name("declarator").is_some_and(declares_function) {
                    *count += 1;
                }
                return;
            }
            "field_declaration_list" | "lambda_expression" | "compound_statement" => return,
            // named namespaces hold no eligible functions in this model
            "namespace_definition" if node.child_by_field_name("name").is_some() => return,
            _ => {}
        }
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            walk(child, count);
        }
    }
    if tree.root_node().has_error() {
        return None;
    }
    let mut n = 0;
    walk(tree.root_node(), &mut n);
    Some(n)
}

#[test]
fn function_count_matches_independent_walk() {
    for (path, lang) in corpus() {
        let bytes = std::fs::read(&path).unwrap();
        let src = SourceFile::from_bytes(&path, lang, &bytes);
        let ctx = parse_file(&src).unwrap();
        assert_eq!(
            Some(ctx.functions.len()),
            independent_count(&src.text, lang),
            "{}",
            path.display()
        );
        for (i, f) in ctx.functions.iter().enumerate() {
            assert_eq!(f.ordinal, i + 1);
            assert_eq!(&src.text[f.body_span.clone()], f.body_text);
        }
    }
}

#[test]
fn crlf_and_latin1_details() {
    let crlf = support::fixtures().join("corpus/08_crlf.c");
    let ctx = parse_file(&SourceFile::read(&crlf, Language::C).unwrap()).unwrap();
    assert_eq!(ctx.functions.len(), 2);
    assert!(ctx.functions[0].body_text.contains("\r\n"));

    let latin = SourceFile::read(support::fixtures().join("corpus/10_latin1.c"), Language::C).unwrap();
    assert!(latin.is_lossy());
    assert_eq!(latin.escapes().len(), 2);
}

fn c_fragment() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("#include <stdio.h>\n".to_string()),
        Just("#define N 4\n".to_string()),
        Just("// note\n".to_string()),
        Just("/* block */".to_string()),
        Just("static int counter;\n".to_string()),
        Just("struct p { int x; };\n".to_string()),
        Just("int f(void)\n{\n    return 1;\n}\n".to_string()),
        Just("static void g(int *a) { *a = 0; }".to_string()),
        Just("#ifdef X\nint h(void) { return 2; }\n#endif\n".to_string()),
        Just("\n".to_string()),
        Just("\t  ".to_string()),
        Just("\r\n".to_string()),
        Just("int broken(".to_string()),
        Just("}".to_string()),
        "[a-z;{}() \n]{0,12}",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn arbitrary_fragments_round_trip(parts in prop::collection::vec(c_fragment(), 0..12)) {
        let text = parts.concat();
        let ctx = parse_text(&text, Language::C).unwrap();
        prop_assert_eq!(codemorph::reconstruct(&ctx), text.clone());
        if let Some(n) = independent_count(&text, Language::C) {
            prop_assert_eq!(ctx.functions.len(), n);
        }
    }

    #[test]
    fn arbitrary_bytes_round_trip(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let src = SourceFile::from_bytes("x.c", Language::C, &bytes);
        let ctx = parse_file(&src).unwrap();
        prop_assert_eq!(reconstruct_bytes(&ctx), bytes);
    }
}
