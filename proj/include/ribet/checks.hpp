#pragma once

// Check registry and scenario runners.  Every verifiable statement has a
// stable identifier; a scenario run produces one verdict per applicable
// check: pass, fail (asserted identity is false), violation (a scenario
// hypothesis does not hold), or error (schema, budget, or internal failure).
// Reports are deterministic for a fixed seed up to the timing fields.

#include <json.hpp>

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "ribet/fitting.hpp"
#include "ribet/formal.hpp"
#include "ribet/koszul.hpp"
#include "ribet/numeric.hpp"
#include "ribet/scenario.hpp"

namespace ribet::checks {

using nlohmann::ordered_json;
using scenario::Kind;
using scenario::Scenario;

enum class Verdict { Pass, Fail, Violation, Error };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Violation: return "violation";
        case Verdict::Error: return "error";
    }
    return "?";
}

struct CheckOutcome {
    Verdict verdict = Verdict::Pass;
    ordered_json details = ordered_json::object();
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<long> spairs;
    std::optional<int> degree_bound;
    std::optional<int> precision;
    std::optional<std::vector<long>> primes;
    std::string only_check;  // run/report a single check id when nonempty
};

/// Stable catalog: check id -> the statement it verifies.
inline const std::vector<std::pair<std::string, std::string>>& catalog() {
    static const std::vector<std::pair<std::string, std::string>> entries = {
        {"fitting_presentation_independence", "Fitt_R(M) depends only on M up to R-module isomorphism"},
        {"fitting_quotient_ideal", "Fitt_R(R/I) = I for finitely generated ideals I"},
        {"fitting_annihilator", "Fitt_R(M) is contained in Ann_R(M)"},
        {"fitting_integer_order", "over Z, Fitt(M) = (#M) for finite M and (0) for infinite M"},
        {"fitting_surjection", "a surjection M ->> M' gives Fitt_R(M) subseteq Fitt_R(M')"},
        {"fitting_base_change", "Fitt_S(M tensor_R S) = Fitt_R(M) S"},
        {"fitting_minor_smith_oracle", "minor enumeration agrees with the Smith-form route"},
        {"fitting_corollary_faithful", "Fitt_T(B/IB) subseteq I for faithful cyclic B over the fiber product"},
        {"hypothesis_charcong", "char(rho(g)) = (x - chi1(g))(x - chi2(g)) mod I on the whole group"},
        {"relations_verify", "stored eps/delta relations hold exactly in M_2(T)"},
        {"lemma_tdi_trace_det", "tr(A) and det(A) lie in I for every A in rho(Delta)"},
        {"theorem_v3_fitting", "Fitt_T(M) subseteq I for M = rho(Delta)/rho(Delta^2)"},
        {"fitting_routes_agree", "numeric Fitting ideal: minors agree with the Smith oracle"},
        {"det_relation_matrices", "det(D) lies in I for every sampled relation matrix D"},
        {"dprime_w_numeric", "the altered matrix kills the b-column: D'.(b_1..b_r)^T = 0"},
        {"detzero_numeric_proxy", "det(D') = 0 whenever some b-entry is a unit"},
        {"irreducibility_proxy", "the b-entries of rho(Delta) generate the unit ideal"},
        {"dvr_hypotheses", "residually triangular shape with characters on the diagonal"},
        {"theorem_v1_recursion", "digit recursion: nontrivial cocycle or precision exhaustion"},
        {"dvr_coboundary_crosscheck", "terminal step agrees with exhaustive coboundary search"},
        {"dvr_digit_invariant", "recovered digits conjugate the upper-right entry to 0 mod p^k"},
        {"hensel_split", "rho(tau) splits with eigenvalues separated by a unit"},
        {"lemma_adcong", "a(s) = chi1(s) and d(s) = chi2(s) mod I in the split basis"},
        {"lemma_kappadef_cocycle", "kappa satisfies the twisted cocycle identity on all pairs"},
        {"kappa_surjectivity", "kappa generates B/IB as a T-module"},
        {"coboundary_witness", "witness extraction from cohomologous cocycles recovers x"},
        {"lemma_dir_e_in_IR", "det(D') - det(D) lies in I_R = <a_i, b_i, c_i, d_i>"},
        {"lemma_detzero_formal", "components of D'.(b-column) are signed J' generators"},
        {"jprime_subset_J", "every J' generator reduces to zero against J"},
        {"lemma_stable_J", "J is stable under the lower Borel action"},
        {"lemma_stable_Jprime", "J' is stable under the lower Borel action"},
        {"lemma_ebar_invariance", "det(D') - det(D) is Borel-invariant modulo J'"},
        {"ebar_rowop_certificate", "row-operation certificate for the Borel invariance (no Groebner)"},
        {"membership_certificate", "det(D') - det(D) = a + j with a in the trace algebra, j in J"},
        {"lemma_air_structure", "the certificate's a-part vanishes at a=b=c=d=0 with nonempty words"},
        {"membership_targets", "user-supplied polynomials split as a + j within the degree bound"},
        {"det_difference_trace_identity", "r=2 swap context: e = t1 delta211 + t2 delta122 - t12 mod J"},
        {"koszul_d2", "Koszul boundary maps compose to zero"},
        {"wcomplex_d2", "adjoint-tensor boundary maps compose to zero"},
        {"theorem_comm_diagram", "the Koszul-to-adjoint diagram commutes and g_1 lands on J"},
        {"lemma_regular_exactness", "graded Koszul exactness over F_p (regular-sequence evidence)"},
        {"bridge_J_vanishes", "numeric specialization sends every J generator to zero"},
        {"bridge_e_matches", "numeric specialization sends e to det(D') - det(D)"},
        {"bridge_certificate_det_in_I", "specialized certificate re-proves det(D) in I"},
    };
    return entries;
}

inline std::string statement_of(const std::string& id) {
    for (const auto& [cid, st] : catalog())
        if (cid == id) return st;
    return "";
}

namespace detail {

class Runner {
  public:
    Runner(const Scenario& sc, const RunOptions& opt) : sc_(sc), opt_(opt) {
        effective_seed_ = opt.seed.value_or(sc.seed);
    }

    void run(const std::string& id, const std::function<CheckOutcome()>& fn) {
        if (!opt_.only_check.empty() && opt_.only_check != id) return;
        ordered_json entry;
        entry["id"] = id;
        entry["statement"] = statement_of(id);
        auto t0 = std::chrono::steady_clock::now();
        CheckOutcome out;
        try {
            out = fn();
        } catch (const BudgetExceeded& e) {
            out.verdict = Verdict::Error;
            out.details["error"] = std::string("budget exceeded: ") + e.what();
        } catch (const std::exception& e) {
            out.verdict = Verdict::Error;
            out.details["error"] = e.what();
        }
        auto t1 = std::chrono::steady_clock::now();
        entry["verdict"] = verdict_name(out.verdict);
        entry["details"] = std::move(out.details);
        entry["inputs_hash"] = hex64(fnv1a(id, fnv1a(sc_.raw.dump())));
        entry["ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        results_.push_back(std::move(entry));
    }

    Rng rng_for(const std::string& id) const { return Rng(fnv1a(id, effective_seed_ ^ 0x9e3779b97f4a7c15ull)); }
    std::uint64_t seed() const { return effective_seed_; }
    const Scenario& sc() const { return sc_; }
    const RunOptions& opt() const { return opt_; }

    long spair_budget() const { return opt_.spairs.value_or(sc_.budgets.spairs); }
    int degree_bound() const { return opt_.degree_bound.value_or(sc_.budgets.degree_bound); }
    std::vector<long> primes(const std::vector<long>& fallback) const {
        return opt_.primes.value_or(fallback);
    }

    std::vector<ordered_json> take() { return std::move(results_); }

  private:
    const Scenario& sc_;
    RunOptions opt_;
    std::uint64_t effective_seed_ = 0;
    std::vector<ordered_json> results_;
};

inline CheckOutcome boolean(bool ok, ordered_json details = ordered_json::object()) {
    CheckOutcome out;
    out.verdict = ok ? Verdict::Pass : Verdict::Fail;
    out.details = std::move(details);
    return out;
}

// ---- fitting suite -------------------------------------------------------------

inline void run_fitting_suite(Runner& R) {
    long instances = R.sc().payload.value("instances", 200);
    auto run_property = [&](const std::string& id, fitting::FittingProperty prop) {
        R.run(id, [&]() {
            Rng rng = R.rng_for(id);
            long failures = 0;
            for (long i = 0; i < instances; ++i)
                if (!fitting::check_fitting_property(prop, rng)) ++failures;
            ordered_json d;
            d["instances"] = instances;
            d["failures"] = failures;
            return boolean(failures == 0, std::move(d));
        });
    };
    run_property("fitting_presentation_independence", fitting::FittingProperty::PresentationIndependence);
    run_property("fitting_quotient_ideal", fitting::FittingProperty::QuotientByIdeal);
    run_property("fitting_annihilator", fitting::FittingProperty::AnnihilatorContainment);
    run_property("fitting_integer_order", fitting::FittingProperty::IntegerOrder);
    run_property("fitting_surjection", fitting::FittingProperty::SurjectionMonotonicity);
    run_property("fitting_base_change", fitting::FittingProperty::BaseChange);
    R.run("fitting_minor_smith_oracle", [&]() {
        Rng rng = R.rng_for("fitting_minor_smith_oracle");
        long failures = 0;
        for (long i = 0; i < instances; ++i)
            if (!fitting::check_minor_smith_agreement(rng)) ++failures;
        ordered_json d;
        d["instances"] = instances;
        d["failures"] = failures;
        return boolean(failures == 0, std::move(d));
    });
    R.run("fitting_corollary_faithful", [&]() {
        Rng rng = R.rng_for("fitting_corollary_faithful");
        long p = R.sc().payload.value("corollary_p", 2);
        unsigned n = R.sc().payload.value("corollary_n", 3u);
        long samples = R.sc().payload.value("corollary_samples", 12);
        auto T = rings::Ring::make(rings::RingSpec::fiber_product(
            rings::RingSpec::truncated_dvr(Int(p), n), rings::RingSpec::truncated_dvr(Int(p), n), Int(p)));
        Int q;
        mpz_pow_ui(q.get_mpz_t(), Int(p).get_mpz_t(), n);
        long failures = 0;
        for (long s = 0; s < samples; ++s) {
            // faithful cyclic generator: unit components congruent mod p
            Int a = 0, b = 0;
            do {
                a = rng.below(static_cast<long>(q.get_si()));
                b = a + p * rng.below(static_cast<long>(q.get_si() / p));
                Int bm;
                mpz_mod(bm.get_mpz_t(), b.get_mpz_t(), q.get_mpz_t());
                b = bm;
            } while (a % p == 0);
            auto beta = T->element(rings::Value(std::vector<rings::Value>{rings::Value(a), rings::Value(b)}));
            std::vector<rings::RingElem> ideal_gens;
            long gens = 1 + rng.below(2);
            for (long t = 0; t < gens; ++t) ideal_gens.push_back(T->from_int(rng.below(static_cast<long>(q.get_si()))));
            if (!fitting::check_fitting_corollary_fiber(T, beta, ideal_gens)) ++failures;
        }
        ordered_json d;
        d["samples"] = samples;
        d["failures"] = failures;
        return boolean(failures == 0, std::move(d));
    });
}

// ---- numeric ribet ---------------------------------------------------------------

struct NumericPipeline {
    numeric::FiniteRepresentation rep;
    numeric::EnumeratedGroup grp;
    numeric::DeltaEpsilonData data;
    rings::LocalIdeal I;
    numeric::HypothesisReport hyp;

    NumericPipeline(const Scenario& sc, const RunOptions& opt, const ordered_json& payload)
        : rep(scenario::rep_from_json(payload, opt.precision.value_or(0))),
          grp(numeric::enumerate_group(rep, sc.budgets.group)),
          data(numeric::span_delta(rep, grp)),
          I(rings::ideal_in_ring(rep.T, rep.ideal_gens)),
          hyp(numeric::check_hypotheses(rep, grp, data, I)) {}
};

inline void run_numeric_checks(Runner& R, NumericPipeline& P, const ordered_json& payload) {
    bool require_proxy = payload.value("require_proxy", false);

    R.run("hypothesis_charcong", [&]() {
        CheckOutcome out;
        out.details["group_order"] = P.grp.elements.size();
        out.details["characters_well_defined"] = P.hyp.chars_well_defined;
        out.details["holds"] = P.hyp.charcong;
        if (!P.hyp.chars_well_defined || !P.hyp.charcong) out.verdict = Verdict::Violation;
        return out;
    });
    R.run("irreducibility_proxy", [&]() {
        CheckOutcome out;
        out.details["holds"] = P.hyp.proxy_unit_b;
        out.details["spanning_rank"] = P.data.span.size();
        if (!P.hyp.proxy_unit_b) {
            out.details["note"] = "proxy fails: conclusions depending on irreducibility are not asserted";
            if (require_proxy) out.verdict = Verdict::Violation;
        }
        return out;
    });
    R.run("relations_verify", [&]() {
        // span_delta re-verified every relation exactly during construction
        ordered_json d;
        d["rank"] = P.data.span.size();
        d["eps_rows"] = P.data.eps_rows.size();
        d["delta_rows"] = P.data.span.size() * P.data.span.size();
        return boolean(true, std::move(d));
    });
    R.run("lemma_tdi_trace_det", [&]() {
        Rng rng = R.rng_for("lemma_tdi_trace_det");
        bool ok = numeric::check_trace_det_in_I(P.rep, P.grp, P.data, P.I, rng);
        ordered_json d;
        d["ideal"] = P.I.to_string();
        return boolean(ok, std::move(d));
    });
    R.run("theorem_v3_fitting", [&]() {
        auto mc = numeric::build_M_and_check(P.rep, P.data, P.I);
        CheckOutcome out;
        out.details["fitting_ideal"] = mc.fitt.to_string();
        out.details["ideal"] = P.I.to_string();
        out.details["module_order"] = mc.coker_size.get_str();
        out.details["holds"] = mc.fitt_in_I;
        if (!mc.fitt_in_I) out.verdict = P.hyp.proxy_unit_b ? Verdict::Fail : Verdict::Violation;
        if (!mc.fitt_in_I && !P.hyp.proxy_unit_b)
            out.details["note"] = "irreducibility proxy fails; the containment is not implied";
        return out;
    });
    R.run("fitting_routes_agree", [&]() {
        auto mc = numeric::build_M_and_check(P.rep, P.data, P.I);
        ordered_json d;
        d["minors"] = mc.fitt.to_string();
        d["smith"] = mc.fitt_oracle.to_string();
        return boolean(mc.routes_agree, std::move(d));
    });
    R.run("det_relation_matrices", [&]() {
        Rng rng = R.rng_for("det_relation_matrices");
        auto res = numeric::check_relation_determinants(P.rep, P.data, P.I, rng, R.sc().budgets.samples);
        ordered_json d;
        d["matrices_checked"] = res.matrices_checked;
        d["exhaustive"] = res.exhaustive;
        return boolean(res.dets_in_I, std::move(d));
    });
    R.run("dprime_w_numeric", [&]() {
        Rng rng = R.rng_for("dprime_w_numeric");
        auto res = numeric::check_relation_determinants(P.rep, P.data, P.I, rng, R.sc().budgets.samples);
        return boolean(res.dprime_w_zero);
    });
    R.run("detzero_numeric_proxy", [&]() {
        Rng rng = R.rng_for("detzero_numeric_proxy");
        auto res = numeric::check_relation_determinants(P.rep, P.data, P.I, rng, R.sc().budgets.samples);
        CheckOutcome out;
        out.details["matrices_under_proxy"] = res.unit_proxy_matrices;
        if (res.unit_proxy_matrices == 0) out.details["note"] = "vacuous: the unit-b proxy holds for no sampled matrix";
        out.verdict = res.dets_prime_zero ? Verdict::Pass : Verdict::Fail;
        return out;
    });
}

// ---- dvr recursion ---------------------------------------------------------------

inline void run_dvr(Runner& R) {
    const auto& payload = R.sc().payload;
    auto rep = scenario::rep_from_json(payload, R.opt().precision.value_or(0));
    auto grp = numeric::enumerate_group(rep, R.sc().budgets.group);
    const Int p = rep.T->spec().p;
    auto maximal = rings::ideal_in_ring(rep.T, {rep.T->from_int(p)});

    R.run("dvr_hypotheses", [&]() {
        CheckOutcome out;
        out.details["group_order"] = grp.elements.size();
        out.details["precision"] = rep.T->spec().n;
        bool charcong = true;
        for (const auto& el : grp.elements) {
            if (!maximal.contains(el.m.trace() - (el.chi1 + el.chi2)) ||
                !maximal.contains(el.m.det() - el.chi1 * el.chi2))
                charcong = false;
        }
        out.details["charcong_mod_m"] = charcong;
        out.details["characters_well_defined"] = grp.characters_well_defined;
        if (!charcong || !grp.characters_well_defined) out.verdict = Verdict::Violation;
        return out;
    });

    std::optional<numeric::DvrOutcome> outcome;
    R.run("theorem_v1_recursion", [&]() {
        CheckOutcome out;
        try {
            outcome = numeric::dvr_recursion(rep, grp);
        } catch (const std::invalid_argument& e) {
            out.verdict = Verdict::Violation;
            out.details["violation"] = e.what();
            return out;
        }
        out.details["outcome"] = outcome->kind == numeric::DvrOutcome::Kind::PrecisionExhausted
                                     ? "precision_exhausted"
                                     : "nontrivial_cocycle";
        out.details["digits"] = outcome->digits;
        out.details["swapped_characters"] = outcome->swapped_characters;
        if (outcome->kind == numeric::DvrOutcome::Kind::NontrivialCocycle) {
            out.details["step"] = outcome->step;
            out.details["kappa_mod_p"] = outcome->kappa_mod_p;  // the certified non-coboundary cocycle
        }
        if (payload.contains("expect")) {
            const auto& ex = payload["expect"];
            if (ex.contains("outcome") && ex["outcome"].get<std::string>() != out.details["outcome"])
                out.verdict = Verdict::Fail;
            if (ex.contains("step") && outcome->kind == numeric::DvrOutcome::Kind::NontrivialCocycle &&
                ex["step"].get<int>() != outcome->step)
                out.verdict = Verdict::Fail;
            if (ex.contains("digits")) {
                std::vector<long> want = ex["digits"].get<std::vector<long>>();
                if (want != outcome->digits) out.verdict = Verdict::Fail;
            }
        }
        return out;
    });

    R.run("dvr_coboundary_crosscheck", [&]() {
        CheckOutcome out;
        if (!outcome) {
            out.verdict = Verdict::Error;
            out.details["error"] = "recursion did not produce an outcome";
            return out;
        }
        if (outcome->kind != numeric::DvrOutcome::Kind::NontrivialCocycle) {
            out.details["note"] = "precision exhausted; every tested step had a coboundary witness";
            return out;
        }
        // exhaustive witness search over F_p must fail for the terminal kappa
        long pl = p.get_si();
        bool witness_found = false;
        for (long x = 0; x < pl && !witness_found; ++x) {
            bool all = true;
            for (size_t s = 0; s < grp.elements.size(); ++s) {
                Int coef = grp.elements[s].chi1.value().z() - grp.elements[s].chi2.value().z();
                Int lhs = outcome->kappa_mod_p[s];
                Int want = coef * x - lhs;
                Int m;
                mpz_mod(m.get_mpz_t(), want.get_mpz_t(), p.get_mpz_t());
                if (m != 0) {
                    all = false;
                    break;
                }
            }
            if (all) witness_found = true;
        }
        out.details["witness_found"] = witness_found;
        return boolean(!witness_found, std::move(out.details));
    });

    R.run("dvr_digit_invariant", [&]() {
        CheckOutcome out;
        if (!outcome || outcome->kind != numeric::DvrOutcome::Kind::PrecisionExhausted) {
            out.details["note"] = "applies to the precision-exhaustion outcome only";
            return out;
        }
        // rebuild the post-pre-step model the digits refer to
        std::vector<numeric::RMat2> mats;
        rings::RingPtr T = rep.T;
        for (const auto& el : grp.elements) mats.push_back(el.m);
        if (outcome->swapped_characters) {
            rings::RingPtr lower = rep.T->lowered();
            std::vector<numeric::RMat2> swapped;
            for (const auto& m : mats) {
                Int a = m.a.value().z(), b = m.b.value().z(), c = m.c.value().z(), d = m.d.value().z();
                swapped.push_back(numeric::RMat2(lower->from_int(d), lower->from_int(c / p),
                                                 lower->from_int(p * b), lower->from_int(a)));
            }
            mats = std::move(swapped);
            T = lower;
        } else {
            bool need_antidiag = false;
            for (const auto& m : mats) {
                Int c = m.c.value().z();
                if (c % p != 0) need_antidiag = true;
            }
            if (need_antidiag)
                for (auto& m : mats) m = numeric::RMat2(m.d, m.c, m.b, m.a);
        }
        int k = static_cast<int>(outcome->digits.size());
        Int X = 0, pk = 1;
        for (int i = 0; i < k; ++i) {
            X += pk * outcome->digits[static_cast<size_t>(i)];
            pk *= p;
        }
        // pk = p^k
        bool ok = true;
        for (const auto& m : mats) {
            Int a = m.a.value().z(), b = m.b.value().z(), c = m.c.value().z(), d = m.d.value().z();
            Int num = b + X * (d - a) - X * X * c;
            Int rem;
            mpz_mod(rem.get_mpz_t(), num.get_mpz_t(), pk.get_mpz_t());
            if (rem != 0) ok = false;
        }
        out.details["digits"] = outcome->digits;
        out.details["modulus"] = pk.get_str();
        return boolean(ok, std::move(out.details));
    });
}

// ---- distinguishable ---------------------------------------------------------------

inline void run_distinguishable(Runner& R) {
    const auto& payload = R.sc().payload;
    auto rep = scenario::rep_from_json(payload, R.opt().precision.value_or(0));
    auto grp = numeric::enumerate_group(rep, R.sc().budgets.group);
    auto I = rings::ideal_in_ring(rep.T, rep.ideal_gens);
    std::vector<int> tau;
    for (const auto& v : payload.at("tau")) tau.push_back(v.get<int>() - 1);  // 1-based in the file

    std::optional<numeric::DistinguishableResult> res;
    R.run("hensel_split", [&]() {
        CheckOutcome out;
        Rng rng = R.rng_for("hensel_split");
        try {
            res = numeric::distinguishable_construct(rep, grp, tau, I, rng);
        } catch (const std::invalid_argument& e) {
            out.verdict = Verdict::Violation;
            out.details["violation"] = e.what();
            return out;
        }
        out.details["lambda1"] = res->lambda1.to_string();
        out.details["lambda2"] = res->lambda2.to_string();
        out.details["group_order"] = grp.elements.size();
        return out;
    });
    auto need = [&](const std::function<CheckOutcome()>& fn) {
        return [&, fn]() {
            if (!res) {
                CheckOutcome out;
                out.verdict = Verdict::Error;
                out.details["error"] = "construction unavailable (hypothesis violation upstream)";
                return out;
            }
            return fn();
        };
    };
    R.run("lemma_adcong", need([&]() { return boolean(res->adcong); }));
    R.run("lemma_kappadef_cocycle", need([&]() {
              ordered_json d;
              d["pairs"] = grp.elements.size() * grp.elements.size();
              return boolean(res->cocycle, std::move(d));
          }));
    R.run("kappa_surjectivity", need([&]() {
              ordered_json d;
              d["module_size"] = res->BmodIB.size();
              return boolean(res->surjective, std::move(d));
          }));
    R.run("coboundary_witness", need([&]() { return boolean(res->witness_extraction); }));
}

// ---- formal contexts ---------------------------------------------------------------

inline void run_formal(Runner& R) {
    const auto& payload = R.sc().payload;

    if (payload.contains("sweep_max_r")) {
        int max_r = payload["sweep_max_r"].get<int>();
        R.run("lemma_dir_e_in_IR", [&]() {
            long contexts = 0, failures = 0;
            for (int r = 1; r <= max_r; ++r)
                for (const auto& rows : formal::all_row_multisets(r)) {
                    ++contexts;
                    if (!formal::check_e_in_IR(formal::build_context(r, rows))) ++failures;
                }
            ordered_json d;
            d["contexts"] = contexts;
            d["failures"] = failures;
            return boolean(failures == 0, std::move(d));
        });
        R.run("lemma_detzero_formal", [&]() {
            long contexts = 0, failures = 0;
            for (int r = 1; r <= max_r; ++r)
                for (const auto& rows : formal::all_row_multisets(r)) {
                    ++contexts;
                    if (!formal::check_Dprime_w(formal::build_context(r, rows))) ++failures;
                }
            ordered_json d;
            d["contexts"] = contexts;
            d["failures"] = failures;
            return boolean(failures == 0, std::move(d));
        });
        return;
    }

    int r = payload.at("r").get<int>();
    auto rows = scenario::rows_from_json(payload.at("rows"));
    auto ctx = formal::build_context(r, rows);
    auto eng = formal::make_engines(ctx, R.spair_budget());

    ordered_json ctx_info;
    ctx_info["r"] = r;
    ctx_info["variables"] = ctx.table->size();
    ctx_info["J_generators"] = ctx.J.size();
    ctx_info["Jprime_generators"] = ctx.Jprime.size();

    R.run("lemma_dir_e_in_IR", [&]() {
        ordered_json d = ctx_info;
        d["e"] = ctx.e.render();
        return boolean(formal::check_e_in_IR(ctx), std::move(d));
    });
    R.run("lemma_detzero_formal", [&]() { return boolean(formal::check_Dprime_w(ctx)); });
    R.run("jprime_subset_J", [&]() {
        groebner::groebner_basis(eng.J, eng.budget);
        for (const auto& g : ctx.Jprime)
            if (!eng.J.engine->contains(mpoly::to_rational(g))) return boolean(false);
        ordered_json d;
        d["basis_size"] = eng.J.engine->basis().size();
        d["spairs"] = eng.J.engine->spairs_processed();
        return boolean(true, std::move(d));
    });
    R.run("lemma_stable_J", [&]() { return boolean(formal::check_B_stability(ctx, eng, formal::WhichIdeal::J)); });
    R.run("lemma_stable_Jprime",
          [&]() { return boolean(formal::check_B_stability(ctx, eng, formal::WhichIdeal::Jprime)); });
    R.run("lemma_ebar_invariance", [&]() { return boolean(formal::check_ebar_invariance(ctx, eng)); });
    R.run("ebar_rowop_certificate", [&]() {
        std::string note;
        bool ok = formal::ebar_rowop_certificate(ctx, &note);
        ordered_json d;
        if (!note.empty()) d["note"] = note;
        return boolean(ok, std::move(d));
    });

    std::optional<formal::MembershipCertificate> cert;
    R.run("membership_certificate", [&]() {
        formal::MembershipOptions mo;
        mo.degree_bound = R.degree_bound();
        cert = formal::solve_membership_A_plus_J(ctx, ctx.e, mo);
        ordered_json d = ctx_info;
        if (!cert) {
            mo.max_products = 3;
            cert = formal::solve_membership_A_plus_J(ctx, ctx.e, mo);
            if (cert) d["escalated_products"] = 3;
        }
        if (!cert) {
            d["not_found_within_bound"] = mo.degree_bound;
            return boolean(false, std::move(d));
        }
        d["verified_exact"] = true;  // solve_membership re-verifies before returning
        d["denominator"] = cert->denominator.get_str();
        ordered_json terms = ordered_json::array();
        for (const auto& t : cert->a_terms) {
            ordered_json tj;
            tj["coeff"] = t.coeff.get_str();
            mpoly::Poly<Rat> mono(ctx.table, ctx.order);
            mono.mutable_terms().push_back({t.r0_mono, Rat(1)});
            tj["monomial"] = mono.render();
            ordered_json gens = ordered_json::array();
            for (size_t gi : t.gen_indices) {
                ordered_json gj;
                gj["name"] = cert->agens[gi].name();
                gj["flavor"] = cert->agens[gi].flavor == formal::TraceDetGenerator::Flavor::Trace ? "trace" : "det";
                gj["word"] = cert->agens[gi].word;
                gens.push_back(gj);
            }
            tj["generators"] = gens;
            terms.push_back(tj);
        }
        d["a_terms"] = terms;
        ordered_json cof = ordered_json::array();
        for (size_t k = 0; k < cert->cofactors.size(); ++k) {
            if (cert->cofactors[k].is_zero()) continue;
            ordered_json cj;
            cj["generator"] = static_cast<long>(k);
            cj["cofactor"] = cert->cofactors[k].render();
            cof.push_back(cj);
        }
        d["cofactors"] = cof;
        return boolean(true, std::move(d));
    });
    R.run("lemma_air_structure", [&]() {
        if (!cert) {
            CheckOutcome out;
            out.verdict = Verdict::Error;
            out.details["error"] = "no certificate available";
            return out;
        }
        return boolean(formal::check_air_structure(ctx, *cert));
    });

    // optional user-supplied membership targets, parsed from infix syntax
    // against the context's variable table
    if (payload.contains("membership_targets")) {
        R.run("membership_targets", [&]() {
            formal::MembershipOptions mo;
            mo.degree_bound = R.degree_bound();
            ordered_json results = ordered_json::array();
            bool all = true;
            for (const auto& t : payload["membership_targets"]) {
                auto target = mpoly::parse_poly(ctx.table, ctx.order, t.get<std::string>());
                auto c = formal::solve_membership_A_plus_J(ctx, target, mo);
                ordered_json rj;
                rj["target"] = target.render();
                rj["found"] = c.has_value();
                if (!c) all = false;
                results.push_back(rj);
            }
            ordered_json d;
            d["targets"] = results;
            return boolean(all, std::move(d));
        });
    }

    bool swap_context = r == 2 && rows.size() == 2 && rows[0] == formal::RowSpec::delta(1, 2) &&
                        rows[1] == formal::RowSpec::delta(2, 1);
    if (swap_context) {
        R.run("det_difference_trace_identity", [&]() {
            auto t1 = ctx.rho[0].trace();
            auto t2 = ctx.rho[1].trace();
            auto t12 = (ctx.rho[0] * ctx.rho[1]).trace();
            auto d211 = ctx.var(ctx.table->index_of("delta211"));
            auto d122 = ctx.var(ctx.table->index_of("delta122"));
            auto expected = t1 * d211 + t2 * d122 - t12;
            groebner::groebner_basis(eng.J, eng.budget);
            auto nf = eng.J.engine->normal_form(mpoly::to_rational(ctx.e - expected));
            ordered_json d;
            d["identity"] = "e = tr(rho1) delta211 + tr(rho2) delta122 - tr(rho1 rho2) mod J";
            return boolean(nf.is_zero(), std::move(d));
        });
    }
}

// ---- koszul -------------------------------------------------------------------------

inline void run_koszul(Runner& R) {
    const auto& payload = R.sc().payload;
    int dmax = payload.value("dmax", 5);
    std::vector<long> primes = R.primes(payload.contains("primes")
                                            ? payload["primes"].get<std::vector<long>>()
                                            : std::vector<long>{2, 3});

    if (payload.value("generic", false)) {
        int r = payload.at("r").get<int>();
        auto sys = koszul::generic_linear_forms(r);
        R.run("koszul_d2", [&]() {
            return boolean(koszul::check_complex(koszul::build_koszul_from(sys.gens, sys.table, sys.order)));
        });
        R.run("lemma_regular_exactness", [&]() {
            ordered_json d;
            d["r"] = r;
            d["dmax"] = dmax;
            d["system"] = "generic linear forms";
            bool all = true;
            for (long p : primes) {
                auto ex = koszul::check_regular_sequence(sys.gens, sys.table, sys.order, p, dmax);
                d["prime_" + std::to_string(p)] = ex.all_exact();
                if (!ex.all_exact()) all = false;
            }
            return boolean(all, std::move(d));
        });
        return;
    }

    int r = payload.at("r").get<int>();
    auto rows = scenario::rows_from_json(payload.at("rows"));
    auto ctx = formal::build_context(r, rows);
    R.run("koszul_d2", [&]() {
        auto kos = koszul::build_koszul(ctx);
        ordered_json d;
        d["levels"] = kos.labels.size();
        return boolean(koszul::check_complex(kos), std::move(d));
    });
    R.run("wcomplex_d2", [&]() { return boolean(koszul::check_complex(koszul::build_wcomplex(ctx))); });
    if (r <= 3)
        R.run("theorem_comm_diagram", [&]() { return boolean(koszul::check_diagram_commutes(ctx)); });
    R.run("lemma_regular_exactness", [&]() {
        ordered_json d;
        d["r"] = r;
        d["dmax"] = dmax;
        d["system"] = "context b-coefficient generators";
        bool all = true;
        for (long p : primes) {
            auto ex = koszul::check_regular_sequence(ctx.Jprime, ctx.table, ctx.order, p, dmax);
            d["prime_" + std::to_string(p)] = ex.all_exact();
            if (!ex.all_exact()) all = false;
        }
        return boolean(all, std::move(d));
    });
}

// ---- end to end -----------------------------------------------------------------------

inline void run_end_to_end(Runner& R) {
    const auto& payload = R.sc().payload;
    NumericPipeline P(R.sc(), R.opt(), payload.at("numeric"));
    run_numeric_checks(R, P, payload.at("numeric"));

    const size_t r = P.data.span.size();
    int max_bridge_r = payload.value("max_bridge_r", 3);
    auto rows = numeric::relation_rows(P.data);

    // deterministic sample of relation matrices for the bridge: the first
    // r-subsets in lexicographic order, capped
    std::vector<std::vector<size_t>> picks;
    if (r >= 1 && static_cast<int>(r) <= max_bridge_r) {
        std::vector<size_t> cur;
        std::function<void(size_t)> rec = [&](size_t start) {
            if (picks.size() >= 3) return;
            if (cur.size() == r) {
                picks.push_back(cur);
                return;
            }
            for (size_t i = start; i + (r - cur.size()) <= rows.size(); ++i) {
                cur.push_back(i);
                rec(i + 1);
                cur.pop_back();
            }
        };
        rec(0);
    }

    R.run("bridge_J_vanishes", [&]() {
        if (picks.empty()) {
            CheckOutcome out;
            out.details["note"] = "bridge skipped (rank 0 or above max_bridge_r)";
            return out;
        }
        for (const auto& pick : picks) {
            std::vector<formal::RowSpec> specs;
            std::vector<std::vector<rings::RingElem>> entries;
            for (size_t idx : pick) {
                const auto& row = rows[idx];
                specs.push_back(row.kind == numeric::RelationRow::Kind::Eps
                                    ? formal::RowSpec::eps()
                                    : formal::RowSpec::delta(row.i, row.j));
                entries.push_back(row.entries);
            }
            auto ctx = formal::build_context(static_cast<int>(r), specs);
            auto point = formal::make_assignment(ctx, P.rep.T, P.data.span, entries);
            for (const auto& g : ctx.J)
                if (!formal::eval_poly(g, point, P.rep.T).is_zero()) return boolean(false);
        }
        ordered_json d;
        d["matrices_bridged"] = picks.size();
        return boolean(true, std::move(d));
    });

    R.run("bridge_e_matches", [&]() {
        if (picks.empty()) {
            CheckOutcome out;
            out.details["note"] = "bridge skipped (rank 0 or above max_bridge_r)";
            return out;
        }
        for (const auto& pick : picks) {
            std::vector<formal::RowSpec> specs;
            std::vector<std::vector<rings::RingElem>> entries;
            for (size_t idx : pick) {
                const auto& row = rows[idx];
                specs.push_back(row.kind == numeric::RelationRow::Kind::Eps
                                    ? formal::RowSpec::eps()
                                    : formal::RowSpec::delta(row.i, row.j));
                entries.push_back(row.entries);
            }
            auto ctx = formal::build_context(static_cast<int>(r), specs);
            auto point = formal::make_assignment(ctx, P.rep.T, P.data.span, entries);
            // numeric det(D') - det(D)
            auto D = matrices::Matrix<rings::RingElem>::from_rows(entries);
            auto Dp = D;
            for (size_t l = 0; l < pick.size(); ++l) {
                const auto& row = rows[pick[l]];
                if (row.kind != numeric::RelationRow::Kind::Delta) continue;
                Dp.at(l, static_cast<size_t>(row.j - 1)) =
                    Dp.at(l, static_cast<size_t>(row.j - 1)) - P.data.span[static_cast<size_t>(row.i - 1)].a;
                Dp.at(l, static_cast<size_t>(row.i - 1)) =
                    Dp.at(l, static_cast<size_t>(row.i - 1)) - P.data.span[static_cast<size_t>(row.j - 1)].d;
            }
            auto numeric_e = matrices::det_n(Dp) - matrices::det_n(D);
            if (!(formal::eval_poly(ctx.e, point, P.rep.T) == numeric_e)) return boolean(false);
        }
        return boolean(true);
    });

    R.run("bridge_certificate_det_in_I", [&]() {
        CheckOutcome out;
        if (picks.empty()) {
            out.details["note"] = "bridge skipped (rank 0 or above max_bridge_r)";
            return out;
        }
        const Int& modulus = P.rep.T->modulus();
        long bridged = 0;
        for (const auto& pick : picks) {
            std::vector<formal::RowSpec> specs;
            std::vector<std::vector<rings::RingElem>> entries;
            for (size_t idx : pick) {
                const auto& row = rows[idx];
                specs.push_back(row.kind == numeric::RelationRow::Kind::Eps
                                    ? formal::RowSpec::eps()
                                    : formal::RowSpec::delta(row.i, row.j));
                entries.push_back(row.entries);
            }
            auto ctx = formal::build_context(static_cast<int>(r), specs);
            formal::MembershipOptions mo;
            mo.degree_bound = R.degree_bound();
            auto cert = formal::solve_membership_A_plus_J(ctx, ctx.e, mo);
            if (!cert) return boolean(false, {{"note", "no certificate within the degree bound"}});
            Int g;
            mpz_gcd(g.get_mpz_t(), cert->denominator.get_mpz_t(), modulus.get_mpz_t());
            if (g != 1) {
                out.details["note"] = "certificate denominator shares a factor with the residue characteristic";
                continue;
            }
            auto point = formal::make_assignment(ctx, P.rep.T, P.data.span, entries);
            // pi(e) = pi(a): evaluate (denominator * a) and scale back
            auto scaled_a = cert->a_part(ctx).map_coeffs<Int>([&](const Rat& q) {
                Rat s = q * cert->denominator;
                return Int(s.get_num());
            });
            auto den_inv = P.rep.T->from_int(cert->denominator).try_invert();
            if (!den_inv) return boolean(false, {{"note", "denominator not invertible in T"}});
            auto pa = formal::eval_poly(scaled_a, point, P.rep.T) * *den_inv;
            auto pe = formal::eval_poly(ctx.e, point, P.rep.T);
            if (!(pa == pe)) return boolean(false, {{"note", "pi(e) != pi(a)"}});
            if (!P.I.contains(pa)) return boolean(false, {{"note", "pi(a) not in I"}});
            ++bridged;
        }
        out.details["certificates_bridged"] = bridged;
        return out;
    });
}

}  // namespace detail

// ---- public entry points ------------------------------------------------------------

inline ordered_json run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
    detail::Runner R(sc, opt);
    auto t0 = std::chrono::steady_clock::now();
    std::string pipeline_error;
    try {
        switch (sc.kind) {
            case Kind::FittingSuite: detail::run_fitting_suite(R); break;
            case Kind::NumericRibet: {
                detail::NumericPipeline P(sc, opt, sc.payload);
                detail::run_numeric_checks(R, P, sc.payload);
                break;
            }
            case Kind::DvrRecursion: detail::run_dvr(R); break;
            case Kind::Distinguishable: detail::run_distinguishable(R); break;
            case Kind::FormalContext: detail::run_formal(R); break;
            case Kind::Koszul: detail::run_koszul(R); break;
            case Kind::EndToEnd: detail::run_end_to_end(R); break;
        }
    } catch (const std::exception& e) {
        pipeline_error = e.what();
    }
    auto t1 = std::chrono::steady_clock::now();

    ordered_json report;
    report["schema_version"] = 1;
    report["scenario"] = sc.raw;
    report["seed"] = opt.seed.value_or(sc.seed);
    ordered_json coverage;
    const ordered_json* ring_holder = nullptr;
    if (sc.payload.contains("ring")) ring_holder = &sc.payload;
    if (sc.payload.contains("numeric") && sc.payload["numeric"].contains("ring"))
        ring_holder = &sc.payload["numeric"];
    if (ring_holder) {
        auto spec = scenario::ring_spec_from_json((*ring_holder)["ring"]);
        if (opt.precision && spec.kind == rings::RingKind::TruncatedDVR)
            spec.n = static_cast<unsigned>(*opt.precision);
        coverage["ring"] = spec.to_string();
        if (spec.kind == rings::RingKind::TruncatedDVR) {
            coverage["precision"] = spec.n;
            coverage["note"] = "verdicts are exact at this truncation precision";
        }
    }
    coverage["degree_bound"] = opt.degree_bound.value_or(sc.budgets.degree_bound);
    if (sc.kind == Kind::Koszul) {
        coverage["dmax"] = sc.payload.value("dmax", 5);
        if (sc.payload.contains("primes")) coverage["primes"] = sc.payload["primes"];
    }
    report["coverage"] = coverage;
    report["checks"] = R.take();
    if (!pipeline_error.empty()) report["pipeline_error"] = pipeline_error;

    long pass = 0, fail = 0, violation = 0, error = 0;
    for (const auto& c : report["checks"]) {
        std::string v = c["verdict"].get<std::string>();
        if (v == "pass") ++pass;
        if (v == "fail") ++fail;
        if (v == "violation") ++violation;
        if (v == "error") ++error;
    }
    report["summary"] = {{"pass", pass}, {"fail", fail}, {"violation", violation}, {"error", error}};
    report["total_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return report;
}

/// 0: all pass.  2: a hypothesis-violation verdict is present (and nothing
/// worse).  1: errors, plain failures, or pipeline-level problems.
inline int exit_code_for(const ordered_json& report) {
    if (report.contains("pipeline_error")) return 1;
    const auto& s = report["summary"];
    if (s["error"].get<long>() > 0) return 1;
    if (s["fail"].get<long>() > 0) return 1;
    if (s["violation"].get<long>() > 0) return 2;
    return 0;
}

/// Strips volatile timing fields; what remains is byte-identical across runs
/// with the same seed.
inline ordered_json strip_timings(ordered_json j) {
    j.erase("total_ms");
    for (auto& c : j["checks"]) c.erase("ms");
    return j;
}

}  // namespace ribet::checks
