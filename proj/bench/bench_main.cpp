// Benchmark: OpenMP scoring kernels and TF-IDF build against the serial
// direct-from-definition references kept for testing. Verifies agreement,
// then reports best-of-N wall times. The reference column shows the naive
// dense formulation; kernel-1T vs kernel-NT isolates the OpenMP speedup.
//
//   relevancy_bench [docs-per-class] [classes] [noise-tokens] [repetitions]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "relevancy/corpus.hpp"
#include "relevancy/filters.hpp"
#include "relevancy/reference.hpp"
#include "relevancy/synthetic.hpp"
#include "relevancy/vectorize.hpp"

using namespace relevancy;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
double best_of(int reps, F&& fn) {
    double best = std::numeric_limits<double>::max();
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

template <typename F>
double best_of_single_thread(int reps, F&& fn) {
#ifdef _OPENMP
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    double t = best_of(reps, fn);
    omp_set_num_threads(saved);
    return t;
#else
    return best_of(reps, fn);
#endif
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

void print_row(const char* name, double reference, double one_thread, double parallel,
               double diff) {
    std::printf("%-10s %11.3f ms %11.3f ms %11.3f ms %7.2fx   %.3e\n", name, reference * 1e3,
                one_thread * 1e3, parallel * 1e3, one_thread / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
    SyntheticSpec spec;
    spec.num_classes = argc > 2 ? static_cast<uint32_t>(std::atoi(argv[2])) : 6;
    spec.docs_per_class = argc > 1 ? static_cast<uint32_t>(std::atoi(argv[1])) : 400;
    spec.noise_tokens = argc > 3 ? static_cast<uint32_t>(std::atoi(argv[3])) : 4000;
    spec.predictive_per_class = 60;
    spec.doc_len = 60;
    spec.emission_prob = 0.3;
    spec.seed = 42;
    const int reps = argc > 4 ? std::atoi(argv[4]) : 5;

    SyntheticCorpus synth = generate_synthetic(spec);
    const Corpus& corpus = synth.corpus;
    Vocabulary vocab = build_vocabulary(corpus, 1);

    std::vector<uint32_t> labels;
    labels.reserve(corpus.documents.size());
    for (const Document& d : corpus.documents) labels.push_back(d.label);

#ifdef _OPENMP
    std::printf("%u docs, %u features, %u classes, %d OpenMP threads, best of %d\n",
                static_cast<uint32_t>(corpus.documents.size()), vocab.size(), spec.num_classes,
                omp_get_max_threads(), reps);
#else
    std::printf("%u docs, %u features, %u classes, OpenMP OFF, best of %d\n",
                static_cast<uint32_t>(corpus.documents.size()), vocab.size(), spec.num_classes,
                reps);
#endif
    std::printf("%-10s %14s %14s %14s %8s   %s\n", "kernel", "reference", "kernel-1T",
                "kernel-NT", "par-spd", "max|diff|");

    SparseDocTermMatrix matrix_par, matrix_ser;
    const double t_tfidf_1t =
        best_of_single_thread(reps, [&] { matrix_par = tfidf_matrix(corpus, vocab, true); });
    const double t_tfidf_nt = best_of(reps, [&] { matrix_par = tfidf_matrix(corpus, vocab, true); });
    const double t_tfidf_ref =
        best_of(reps, [&] { matrix_ser = reference::tfidf_matrix(corpus, vocab, true); });
    double tfidf_diff = matrix_par.nnz() == matrix_ser.nnz()
                            ? max_abs_diff(matrix_par.val, matrix_ser.val)
                            : std::numeric_limits<double>::infinity();
    print_row("tfidf", t_tfidf_ref, t_tfidf_1t, t_tfidf_nt, tfidf_diff);

    const SparseDocTermMatrix& m = matrix_par;
    std::vector<double> chi_par, chi_ser, f_par, f_ser, mi_par, mi_ser;

    const double t_chi_1t = best_of_single_thread(
        reps, [&] { chi_par = chi2_scores(m, labels, spec.num_classes); });
    const double t_chi_nt =
        best_of(reps, [&] { chi_par = chi2_scores(m, labels, spec.num_classes); });
    const double t_chi_ref =
        best_of(reps, [&] { chi_ser = reference::chi2_scores(m, labels, spec.num_classes); });
    print_row("chi2", t_chi_ref, t_chi_1t, t_chi_nt, max_abs_diff(chi_par, chi_ser));

    const double t_f_1t = best_of_single_thread(
        reps, [&] { f_par = anova_f_scores(m, labels, spec.num_classes); });
    const double t_f_nt =
        best_of(reps, [&] { f_par = anova_f_scores(m, labels, spec.num_classes); });
    const double t_f_ref =
        best_of(reps, [&] { f_ser = reference::anova_f_scores(m, labels, spec.num_classes); });
    print_row("anova_f", t_f_ref, t_f_1t, t_f_nt, max_abs_diff(f_par, f_ser));

    const double t_mi_1t = best_of_single_thread(reps, [&] { mi_par = mi_scores(corpus, vocab); });
    const double t_mi_nt = best_of(reps, [&] { mi_par = mi_scores(corpus, vocab); });
    const double t_mi_ref = best_of(reps, [&] { mi_ser = reference::mi_scores(corpus, vocab); });
    print_row("mi", t_mi_ref, t_mi_1t, t_mi_nt, max_abs_diff(mi_par, mi_ser));

    const double tol = 1e-9;
    const bool agree = tfidf_diff < tol && max_abs_diff(chi_par, chi_ser) < 1e-7 &&
                       max_abs_diff(f_par, f_ser) < 1e-6 && max_abs_diff(mi_par, mi_ser) < tol;
    std::printf("agreement: %s\n", agree ? "ok" : "MISMATCH");
    return agree ? 0 : 1;
}
