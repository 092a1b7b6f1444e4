mod common;

use gradpath::codegen::{emit_sql_view, emit_two_stage_sql, SqlViewSpec};
use gradpath::pipeline::{self, published, Category, ModelId};
use sqlparser::dialect::{AnsiDialect, GenericDialect, SQLiteDialect};
use sqlparser::parser::Parser;

use common::sql::{max_view_error, random_rows, two_stage_rows};

#[test]
fn sqlite_has_exp() {
    let conn = rusqlite::Connection::open_in_memory().unwrap();
    let e: f64 = conn.query_row("SELECT EXP(1.0)", [], |r| r.get(0)).unwrap();
    assert!((e - std::f64::consts::E).abs() < 1e-15);
}

#[test]
fn single_model_views_match_in_process_scores() {
    let rows = random_rows(100, 11);
    for id in [ModelId::Pm1, ModelId::Pm2, ModelId::Pm3] {
        let err = max_view_error(&common::fixture(id.clone()), &rows);
        assert!(err < 1e-6, "{id}: {err}");
    }
}

#[test]
fn two_stage_view_matches_in_process_prediction() {
    let rows = random_rows(100, 12);
    let pm2 = common::fixture(ModelId::Pm2);
    let pm3 = common::fixture(ModelId::Pm3);
    for threshold in [0.0, 0.2, 0.5, 1.0] {
        let sql = two_stage_rows(&pm2, &pm3, &rows, threshold);
        let mut numeric = 0;
        for ((id, p, t, cat), row) in sql.iter().zip(&rows) {
            let want = pipeline::predict_two_stage(&pm2, &pm3, row, threshold).unwrap();
            assert_eq!(id, &want.study_right_id);
            assert!((p - want.p_graduate_4y).abs() < 1e-6);
            match want.category {
                Category::Numeric => {
                    numeric += 1;
                    assert_eq!(cat, "numeric");
                    assert!((t.unwrap() - want.time_to_degree.unwrap()).abs() < 1e-6);
                }
                Category::FourYearsOrMore => {
                    assert_eq!(cat, "four years or more");
                    assert!(t.is_none());
                }
            }
        }
        if threshold == 0.0 {
            assert_eq!(numeric, rows.len());
        }
    }
}

#[test]
fn emitted_sql_parses_under_standard_grammars() {
    let spec = SqlViewSpec::new("predictions", "features", "study_right_id");
    let mut texts = vec![emit_two_stage_sql(
        &published::artifact(&ModelId::Pm2).unwrap(),
        &published::artifact(&ModelId::Pm3).unwrap(),
        &spec,
    )
    .unwrap()];
    for id in [ModelId::Pm1, ModelId::Pm2, ModelId::Pm3] {
        texts.push(emit_sql_view(&published::artifact(&id).unwrap(), &spec).unwrap());
    }
    for sql in &texts {
        for stmts in [
            Parser::parse_sql(&GenericDialect {}, sql),
            Parser::parse_sql(&AnsiDialect {}, sql),
            Parser::parse_sql(&SQLiteDialect {}, sql),
        ] {
            let stmts = stmts.unwrap_or_else(|e| panic!("{e}\n{sql}"));
            assert_eq!(stmts.len(), 1);
        }
    }
}
