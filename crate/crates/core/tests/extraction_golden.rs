mod common;

use factcheck_core::ingest::{extract_article, ExtractError};

#[test]
fn golden_pages_match_expected_records_byte_for_byte() {
    let cases = common::golden_cases();
    assert!(cases.len() >= 5);
    for case in &cases {
        let (page, profile) = common::golden_page(case);
        let record = extract_article(&page, &profile).unwrap_or_else(|e| panic!("{}: {e}", case.page));
        let actual = serde_json::to_string_pretty(&record).unwrap() + "\n";
        assert_eq!(actual, common::golden_expected(case), "{}", case.page);
    }
}

#[test]
fn page_without_verdict_has_absent_verdict() {
    let case = common::golden_cases()
        .into_iter()
        .find(|c| c.page == "a2.html")
        .unwrap();
    let (page, profile) = common::golden_page(&case);
    let record = extract_article(&page, &profile).unwrap();
    assert_eq!(record.raw_verdict, None);
    assert!(record.raw_topic.is_some());
}

#[test]
fn pdf_is_unsupported() {
    let case = &common::golden_cases()[0];
    let (mut page, profile) = common::golden_page(case);
    page.content_type = "application/pdf".into();
    assert_eq!(
        extract_article(&page, &profile),
        Err(ExtractError::UnsupportedContent("application/pdf".into()))
    );
}

#[test]
fn extraction_is_deterministic() {
    for case in &common::golden_cases() {
        let (page, profile) = common::golden_page(case);
        assert_eq!(extract_article(&page, &profile), extract_article(&page, &profile));
    }
}
