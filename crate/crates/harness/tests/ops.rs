use campus_harness::ops::{parse, DEFAULT_OPS};

#[test]
fn the_shipped_mix_has_the_four_operations() {
    let ops = parse(DEFAULT_OPS).unwrap();
    let names: Vec<&str> = ops.iter().map(|o| o.name.as_str()).collect();
    assert_eq!(names, ["task_status_update", "task_list_refresh", "attendance_sheet", "inventory_catalog"]);
    assert_eq!(ops[0].resolve.as_deref(), Some("/api/housekeeping/tasks/"));
    assert!(ops.iter().all(|o| !o.path.starts_with("/api/")));
}

#[test]
fn bad_mixes_are_refused() {
    let one = |body: &str| format!("[[operation]]\n{body}\n");
    let cases = [
        "".to_string(),
        one(r#"name = "a"
user = "u"
path = "relative""#),
        one(r#"name = "a"
user = "u"
path = "//evil.example/""#),
        one(r#"name = "A b"
user = "u"
path = "/x""#),
        one(r#"name = "a"
user = " "
path = "/x""#),
        one(r#"name = "a"
user = "u"
path = "/x/{id}/""#),
        one(r#"name = "a"
user = "u"
path = "/x"
resolve = "/api/x""#),
        one(r#"name = "a"
user = "u"
path = "/api/x""#),
        one(r#"name = "a"
user = "u"
path = "/x"
colour = "red""#),
        format!("{}{}", one("name = \"a\"\nuser = \"u\"\npath = \"/x\""), one("name = \"a\"\nuser = \"u\"\npath = \"/y\"")),
        "not toml at all [".to_string(),
    ];
    for c in &cases {
        assert!(parse(c).is_err(), "accepted:\n{c}");
    }
}
