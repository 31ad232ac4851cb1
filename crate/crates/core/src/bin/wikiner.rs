fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WIKINER_LOG", "warn")).init();
    std::process::exit(wikiner::project::run(std::env::args_os()));
}
