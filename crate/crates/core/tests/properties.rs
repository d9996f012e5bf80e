use bstkit::aux::{parse_aux, unique_keys, write_aux, AuxFile};
use bstkit::bib::{normalize_whitespace, parse_bib};
use bstkit::bst::parse_bst;
use bstkit::latex::{fixpoint, run_pass, scan_tex};
use bstkit::names::split_names;
use proptest::prelude::*;

fn key() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9:-]{0,8}"
}

fn word() -> impl Strategy<Value = String> {
    "[A-Za-z][a-z.]{0,6}"
}

/// Field value text: words, optional brace groups, irregular spacing.
fn value() -> impl Strategy<Value = String> {
    prop::collection::vec(prop_oneof![word(), word().prop_map(|w| format!("{{{w} x}}"))], 1..6)
        .prop_flat_map(|words| {
            let n = words.len();
            (
                Just(words),
                prop::collection::vec(prop_oneof![Just(" "), Just("  "), Just("\n   "), Just("\t")], n),
            )
        })
        .prop_map(|(words, seps)| {
            words
                .iter()
                .zip(seps)
                .map(|(w, s)| format!("{w}{s}"))
                .collect::<String>()
                .trim_end()
                .to_string()
        })
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

proptest! {
    #[test]
    fn bib_round_trip(
        entries in prop::collection::btree_map(key(), prop::collection::btree_map("[a-z]{1,8}", value(), 1..5), 1..6),
        quoted in any::<bool>(),
    ) {
        let mut text = String::from("leading comment text\n");
        for (k, fields) in &entries {
            text.push_str(&format!("@Article{{{k},\n"));
            for (name, v) in fields {
                if quoted {
                    text.push_str(&format!("  {name} = \"{v}\",\n"));
                } else {
                    text.push_str(&format!("  {name} = {{{v}}},\n"));
                }
            }
            text.push_str("}\n\n");
        }
        let (db, diags) = parse_bib(&text, "gen.bib");
        prop_assert!(diags.is_empty(), "{:?}", diags);
        prop_assert_eq!(db.len(), entries.len());
        for (k, fields) in &entries {
            let e = db.lookup(k).unwrap();
            prop_assert_eq!(&e.entry_type, "article");
            prop_assert_eq!(e.fields.len(), fields.len());
            for (name, v) in fields {
                let expected = collapse(v);
                prop_assert_eq!(e.get_field(name), Some(expected.as_str()));
                prop_assert_eq!(e.get_field(&name.to_uppercase()), Some(expected.as_str()));
            }
        }
    }

    #[test]
    fn whitespace_normalization_is_idempotent(s in "[ a-z\t\n{}.]{0,40}") {
        let once = normalize_whitespace(&s);
        prop_assert_eq!(normalize_whitespace(&once), once.clone());
        prop_assert_eq!(once, collapse(&s));
    }

    #[test]
    fn aux_round_trip(
        cites in prop::collection::vec(key(), 0..8),
        style in prop::option::of("[a-z]{1,8}"),
        data in prop::collection::vec("[a-z]{1,8}", 0..3),
        labels in prop::collection::vec((key(), 1u32..50), 0..5),
    ) {
        let mut aux = AuxFile { citations: cites, style, data, ..AuxFile::default() };
        for (k, n) in &labels {
            aux.set_bibcite(k, &n.to_string());
        }
        let text = write_aux(&aux);
        let back = parse_aux(&text).unwrap();
        prop_assert_eq!(&back, &aux);
        prop_assert_eq!(write_aux(&back), text);
    }

    #[test]
    fn unique_keys_is_first_occurrence_order(keys in prop::collection::vec("[a-d]", 0..20)) {
        let once = unique_keys(&keys);
        prop_assert_eq!(unique_keys(&once), once.clone());
        let mut oracle: Vec<String> = Vec::new();
        for k in &keys {
            if !oracle.contains(k) {
                oracle.push(k.clone());
            }
        }
        prop_assert_eq!(once, oracle);
    }

    #[test]
    fn braces_protect_and(
        outside in prop::collection::vec("[A-Z][a-z]{1,5}", 1..4),
        inside in "[A-Z][a-z]{1,5}",
    ) {
        let braced = format!("{{{inside} and {inside}}}");
        let list = format!("{} {braced} and {}", outside.join(" and "), outside[0]);
        let names = split_names(&list);
        prop_assert_eq!(names.len(), outside.len() + 1);
        prop_assert!(names.iter().any(|n| n.contains(&braced)));
        for n in &names {
            let depth = n.chars().fold(0i32, |d, c| d + (c == '{') as i32 - (c == '}') as i32);
            prop_assert_eq!(depth, 0);
        }
    }

    #[test]
    fn bst_source_round_trip(
        bodies in prop::collection::vec(
            prop::collection::vec(prop_oneof![
                Just("\"s\"".to_string()),
                (0i64..100).prop_map(|n| format!("#{n}")),
                Just("write$".to_string()),
                Just("'x".to_string()),
                Just("{ skip$ }".to_string()),
                Just("{ #1 { newline$ } if$ }".to_string()),
            ], 0..8),
            1..4),
    ) {
        let mut src = String::from("ENTRY {author}{x}{}\nREAD\n");
        for (i, body) in bodies.iter().enumerate() {
            src.push_str(&format!("FUNCTION {{f{i}}} {{ {} }}\nEXECUTE {{f{i}}}\n", body.join(" ")));
        }
        let (program, diags) = parse_bst(&src, "gen.bst");
        prop_assert!(diags.is_empty(), "{:?}", diags);
        let printed = program.to_source();
        let (again, diags) = parse_bst(&printed, "printed.bst");
        prop_assert!(diags.is_empty());
        prop_assert_eq!(again.to_source(), printed);
        prop_assert_eq!(again.commands.len(), program.commands.len());
    }

    #[test]
    fn inline_documents_converge_within_two_passes(
        items in prop::collection::btree_set(key(), 0..6),
        cited in prop::collection::vec(key(), 0..8),
        filler in "[a-z ,.]{0,12}",
    ) {
        let mut tex = String::new();
        for c in &cited {
            tex.push_str(&format!("{filler}\\cite{{{c}}}"));
        }
        tex.push_str("\n\\begin{thebibliography}{9}\n");
        for k in &items {
            tex.push_str(&format!("\\bibitem{{{k}}} text\n"));
        }
        tex.push_str("\\end{thebibliography}\n");
        let scan = scan_tex(&tex).unwrap();
        let passes = fixpoint(&scan, None, 5).unwrap();
        prop_assert!(passes.len() <= 2);

        let last = passes.last().unwrap();
        prop_assert!(!last.labels_changed);
        // Idempotence at the fixpoint.
        let again = run_pass(&scan, Some(&last.new_aux));
        prop_assert_eq!(&again.new_aux, &last.new_aux);
        prop_assert!(!again.labels_changed);

        // Every cite becomes exactly one mark; the rest of the text survives.
        let mut expected = String::new();
        for c in &cited {
            let label = items.iter().position(|k| k == c).map_or("?".to_string(), |i| (i + 1).to_string());
            expected.push_str(&format!("{filler}[{label}]"));
        }
        prop_assert!(last.rendered.starts_with(&expected));
        let tail = "\\end{thebibliography}\n";
        prop_assert!(last.rendered.ends_with(tail));
    }
}
