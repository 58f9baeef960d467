#include <pthread.h>

#include <iostream>

#include "cli.hpp"

namespace {

struct Job {
    std::vector<std::string> args;
    int rc = 0;
};

void* run(void* p) {
    auto* job = static_cast<Job*>(p);
    job->rc = mttlab::cli::run_command(job->args, std::cout, std::cerr);
    return nullptr;
}

}  // namespace

// Deep outputs recurse deeply; the work runs on a thread with a 1 GiB stack.
int main(int argc, char** argv) {
    Job job{std::vector<std::string>(argv + 1, argv + argc)};
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    pthread_attr_setstacksize(&attr, std::size_t{1} << 30);
    pthread_t th;
    if (pthread_create(&th, &attr, run, &job) != 0) return run(&job), job.rc;
    pthread_join(th, nullptr);
    return job.rc;
}
