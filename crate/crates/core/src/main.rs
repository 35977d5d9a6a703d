fn main() {
    // die quietly when output is piped to a consumer that stops reading
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(obstructor::cli::run());
}
