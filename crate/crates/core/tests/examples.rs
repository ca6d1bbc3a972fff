// Every example under examples/ must run to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }

        #[test]
        fn $name() {
            $name::run_example().expect(concat!(stringify!($name), " example failed"));
        }
    };
}

example!(dedup_corpus);
example!(train_tokenizer);
example!(pack_shards);
example!(corpus_stats);
example!(lr_schedule);
example!(spike_rollback);
example!(cross_entropy);
example!(full_pipeline);
