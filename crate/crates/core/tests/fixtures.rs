mod common;

use gradpath::pipeline::{published, save_artifact, ModelArtifact, ModelId};

use common::fixture_path;

#[test]
fn shipped_fixtures_match_published_coefficients() {
    let update = std::env::var_os("UPDATE_FIXTURES").is_some();
    for id in [ModelId::Pm1, ModelId::Pm2, ModelId::Pm3] {
        let built = published::artifact(&id).unwrap();
        let path = fixture_path(&id);
        if update {
            save_artifact(&built, &path).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, built.to_json().unwrap(), "{} is stale", path.display());
        let loaded = ModelArtifact::from_json(&text).unwrap();
        assert_eq!(loaded, built);
        loaded.validate().unwrap();
    }
}

#[test]
fn fixture_metadata_documents_training_sizes() {
    let ns: Vec<u64> = [ModelId::Pm1, ModelId::Pm2, ModelId::Pm3]
        .into_iter()
        .map(|id| common::fixture(id).n)
        .collect();
    assert_eq!(ns, published::N);
}
