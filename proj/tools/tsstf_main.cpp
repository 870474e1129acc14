// Command-line front end: simulate degraded observations, fuse them, and
// score the results.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "png_writer.hpp"
#include "tsstf/metrics.hpp"
#include "tsstf/raster_io.hpp"
#include "tsstf/simulate.hpp"
#include "tsstf/solver.hpp"
#include "tsstf/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tsstf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitSolverAbort = 3;

std::string isoNow() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string formatMetric(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

json paramsToJson(const FusionParams& p) {
    json j = {
        {"delta", p.delta},     {"kZero", p.kZero},   {"cAlpha", p.cAlpha},
        {"lambda", p.lambda},   {"qNorm", qNormName(p.qNorm)},
        {"sigmaH", p.sigmaH},   {"rH", p.rH},         {"rL", p.rL},
        {"maxIter", p.maxIter}, {"tolRel", p.tolRel},
    };
    if (p.betaPerBand) j["betaPerBand"] = *p.betaPerBand;
    if (p.epsH) j["epsH"] = *p.epsH;
    if (p.epsL) j["epsL"] = *p.epsL;
    if (p.etaH) j["etaH"] = *p.etaH;
    if (p.etaL) j["etaL"] = *p.etaL;
    return j;
}

FusionParams paramsFromJson(const json& j, FusionParams p) {
    if (j.contains("delta")) p.delta = j.at("delta").get<double>();
    if (j.contains("kZero")) p.kZero = j.at("kZero").get<int>();
    if (j.contains("cAlpha")) p.cAlpha = j.at("cAlpha").get<double>();
    if (j.contains("lambda")) p.lambda = j.at("lambda").get<double>();
    if (j.contains("qNorm")) p.qNorm = qNormFromName(j.at("qNorm").get<std::string>());
    if (j.contains("sigmaH")) p.sigmaH = j.at("sigmaH").get<double>();
    if (j.contains("rH")) p.rH = j.at("rH").get<double>();
    if (j.contains("rL")) p.rL = j.at("rL").get<double>();
    if (j.contains("betaPerBand")) p.betaPerBand = j.at("betaPerBand").get<std::vector<double>>();
    if (j.contains("epsH")) p.epsH = j.at("epsH").get<double>();
    if (j.contains("epsL")) p.epsL = j.at("epsL").get<double>();
    if (j.contains("etaH")) p.etaH = j.at("etaH").get<double>();
    if (j.contains("etaL")) p.etaL = j.at("etaL").get<double>();
    if (j.contains("maxIter")) p.maxIter = j.at("maxIter").get<std::size_t>();
    if (j.contains("tolRel")) p.tolRel = j.at("tolRel").get<double>();
    return p;
}

void writeManifest(const fs::path& dir, json manifest) {
    manifest["finishedAt"] = isoNow();
    manifest["version"] = kVersion;
    std::ofstream f(dir / "manifest.json", std::ios::trunc);
    f << manifest.dump(2) << "\n";
}

void writePreview(const fs::path& path, const MultiBandImage& img,
                  const std::vector<int>& bandSel) {
    std::vector<std::uint8_t> rgb(img.pixelCount() * 3);
    for (std::size_t i = 0; i < img.height; ++i)
        for (std::size_t j = 0; j < img.width; ++j)
            for (int c = 0; c < 3; ++c) {
                const std::size_t b =
                    std::min<std::size_t>(static_cast<std::size_t>(bandSel[c]), img.bands - 1);
                const double v = std::clamp(img.at(i, j, b), 0.0, 1.0);
                rgb[(i * img.width + j) * 3 + c] = static_cast<std::uint8_t>(v * 255.0 + 0.5);
            }
    writePngRgb8(path.string(), img.width, img.height, rgb);
}

struct FuseArgs {
    std::string hrRefPath, lrRefPath, lrTargetPath, outDir, configPath;
    std::size_t scale = 0;
    bool preview = false;
    bool exportGuide = false;
    std::vector<int> previewBands{0, 1, 2};
};

// Which tuning flags were given explicitly (those win over --config).
struct FuseOverrides {
    bool sigmaH = false, rH = false, rL = false, delta = false, kZero = false;
    bool cAlpha = false, lambda = false, qNorm = false, maxIter = false, tolRel = false;
};

int cmdFuse(const FuseArgs& args, const FusionParams& cliParams, const FuseOverrides& given) {
    fs::create_directories(args.outDir);
    const fs::path out(args.outDir);
    json manifest = {
        {"command", "fuse"},
        {"startedAt", isoNow()},
        {"inputs",
         {{"hrRef", args.hrRefPath}, {"lrRef", args.lrRefPath}, {"lrTarget", args.lrTargetPath}}},
        {"scale", args.scale},
        {"status", "error"},
    };

    try {
        FusionParams params;
        if (!args.configPath.empty()) {
            std::ifstream cfg(args.configPath);
            if (!cfg) throw std::runtime_error("cannot open config " + args.configPath);
            json j;
            cfg >> j;
            params = paramsFromJson(j, params);
        }
        // Explicit flags override the config file.
        if (given.sigmaH) params.sigmaH = cliParams.sigmaH;
        if (given.rH) params.rH = cliParams.rH;
        if (given.rL) params.rL = cliParams.rL;
        if (given.delta) params.delta = cliParams.delta;
        if (given.kZero) params.kZero = cliParams.kZero;
        if (given.cAlpha) params.cAlpha = cliParams.cAlpha;
        if (given.lambda) params.lambda = cliParams.lambda;
        if (given.qNorm) params.qNorm = cliParams.qNorm;
        if (given.maxIter) params.maxIter = cliParams.maxIter;
        if (given.tolRel) params.tolRel = cliParams.tolRel;

        const MultiBandImage hrRef = readRaster(args.hrRefPath);
        const MultiBandImage lrRef = readRaster(args.lrRefPath);
        const MultiBandImage lrTarget = readRaster(args.lrTargetPath);
        if (args.scale == 0 || hrRef.width % args.scale != 0 || hrRef.height % args.scale != 0 ||
            lrRef.width * args.scale != hrRef.width ||
            lrRef.height * args.scale != hrRef.height ||
            lrTarget.width != lrRef.width || lrTarget.height != lrRef.height)
            throw std::invalid_argument("--scale is inconsistent with the raster dimensions");

        FusionProblem problem = makeProblem(hrRef, lrRef, lrTarget, args.scale, params);
        problem.params =
            deriveParameters(problem.hrRef, problem.lrRef, problem.sensor, problem.params);
        manifest["params"] = paramsToJson(problem.params);

        if (args.exportGuide) {
            const GuideImage guide = buildGuide(problem.hrRef);
            MultiBandImage plane(guide.width, guide.height, 1);
            plane.values = guide.values;
            writeRaster(plane, (out / "guide.f32").string());
            for (std::size_t pd = 0; pd < 4; ++pd) {
                plane.values = problem.weights.planes[pd];
                writeRaster(plane, (out / ("weights_d" + std::to_string(pd + 1) + ".f32")).string());
            }
        }

        FusionResult result;
        try {
            result = solve(problem);
        } catch (const SolverDivergence& e) {
            manifest["status"] = std::string("solver-abort: ") + e.what();
            writeManifest(out, manifest);
            std::cerr << "error: " << e.what() << "\n";
            return kExitSolverAbort;
        }

        writeRaster(result.targetHr, (out / "target_hr.f32").string());
        writeRaster(result.refHrDenoised, (out / "ref_hr_denoised.f32").string());
        writeRaster(result.sparseHr, (out / "sparse_hr.f32").string());
        writeRaster(result.sparseLr, (out / "sparse_lr.f32").string());
        writeRaster(result.sparseLt, (out / "sparse_lt.f32").string());
        {
            std::ofstream trace(out / "trace.csv", std::ios::trunc);
            trace << traceCsv(result.residualTrace);
        }
        if (args.preview) {
            writePreview(out / "preview.png", result.targetHr, args.previewBands);
            manifest["outputs"]["preview"] = (out / "preview.png").string();
        }

        manifest["outputs"]["targetHr"] = (out / "target_hr.f32").string();
        manifest["outputs"]["refHrDenoised"] = (out / "ref_hr_denoised.f32").string();
        manifest["outputs"]["sparseHr"] = (out / "sparse_hr.f32").string();
        manifest["outputs"]["sparseLr"] = (out / "sparse_lr.f32").string();
        manifest["outputs"]["sparseLt"] = (out / "sparse_lt.f32").string();
        manifest["outputs"]["trace"] = (out / "trace.csv").string();
        manifest["converged"] = result.converged;
        manifest["iterations"] = result.iterations;
        manifest["finalAlpha"] = result.finalAlpha;
        manifest["status"] = "ok";
        writeManifest(out, manifest);

        std::cout << "fuse: " << (result.converged ? "converged" : "iteration cap reached")
                  << " after " << result.iterations << " iterations\n";
        return kExitOk;
    } catch (const std::exception& e) {
        manifest["status"] = std::string("error: ") + e.what();
        writeManifest(out, manifest);
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

struct SimulateArgs {
    std::string outDir;
    std::string hrRefPath, hrTargetPath;
    std::vector<std::size_t> synthetic;  // W H B
    int caseId = 1;
    std::uint64_t seed = 0;
    std::size_t scale = 0;
};

int cmdSimulate(const SimulateArgs& args) {
    fs::create_directories(args.outDir);
    const fs::path out(args.outDir);
    json manifest = {
        {"command", "simulate"}, {"startedAt", isoNow()}, {"case", args.caseId},
        {"seed", args.seed},     {"scale", args.scale},   {"status", "error"},
    };

    try {
        MultiBandImage truthRef, truthTarget;
        if (!args.synthetic.empty()) {
            if (args.synthetic.size() != 3)
                throw std::invalid_argument("--synthetic expects W H B");
            SyntheticScene scene = makeSyntheticScene(args.synthetic[0], args.synthetic[1],
                                                      args.synthetic[2], args.seed);
            truthRef = std::move(scene.hrRef);
            truthTarget = std::move(scene.hrTarget);
            manifest["synthetic"] = {{"width", args.synthetic[0]},
                                     {"height", args.synthetic[1]},
                                     {"bands", args.synthetic[2]}};
        } else if (!args.hrRefPath.empty() && !args.hrTargetPath.empty()) {
            truthRef = readRaster(args.hrRefPath);
            truthTarget = readRaster(args.hrTargetPath);
            if (!truthRef.sameShape(truthTarget))
                throw std::invalid_argument("reference and target HR rasters differ in shape");
            manifest["inputs"] = {{"hrRef", args.hrRefPath}, {"hrTarget", args.hrTargetPath}};
        } else {
            throw std::invalid_argument(
                "provide either --synthetic W H B or both --hr-ref and --hr-target");
        }

        if (args.scale == 0 || truthRef.width % args.scale != 0 ||
            truthRef.height % args.scale != 0)
            throw std::invalid_argument("--scale must divide the HR dimensions");
        const SensorModel sensor{args.scale, truthRef.width, truthRef.height};

        const MultiBandImage hrRefNoisy = applyNoiseCase(truthRef, args.caseId, args.seed);
        const MultiBandImage lrRef = simulateLr(truthRef, sensor);
        const MultiBandImage lrTarget = simulateLr(truthTarget, sensor);

        writeRaster(hrRefNoisy, (out / "hr_ref.f32").string());
        writeRaster(lrRef, (out / "lr_ref.f32").string());
        writeRaster(lrTarget, (out / "lr_target.f32").string());
        writeRaster(truthTarget, (out / "hr_target_truth.f32").string());

        const NoiseCase nc = noiseCaseParams(args.caseId);
        manifest["noise"] = {{"sigmaH", nc.sigma}, {"rH", nc.spRatio}};
        manifest["outputs"] = {{"hrRef", (out / "hr_ref.f32").string()},
                               {"lrRef", (out / "lr_ref.f32").string()},
                               {"lrTarget", (out / "lr_target.f32").string()},
                               {"hrTargetTruth", (out / "hr_target_truth.f32").string()}};
        manifest["status"] = "ok";
        writeManifest(out, manifest);
        std::cout << "simulate: wrote case " << args.caseId << " corpus to " << args.outDir
                  << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        manifest["status"] = std::string("error: ") + e.what();
        writeManifest(out, manifest);
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

struct EvaluateArgs {
    std::string estimatePath, truthPath, csvPath;
    std::string site = "-", caseName = "-", method = "tsstf";
    bool perBand = false;
};

int cmdEvaluate(const EvaluateArgs& args) {
    try {
        const MultiBandImage estimate = readRaster(args.estimatePath);
        const MultiBandImage truth = readRaster(args.truthPath);
        const MetricReport report = evaluate(estimate, truth);

        std::string row = args.site + "," + args.caseName + "," + args.method + "," +
                          formatMetric(report.psnr) + "," + formatMetric(report.mssim);
        if (args.perBand)
            for (double s : report.perBandSsim) row += "," + formatMetric(s);

        std::cout << "psnr=" << formatMetric(report.psnr)
                  << " mssim=" << formatMetric(report.mssim) << "\n";
        if (!args.csvPath.empty()) {
            const bool fresh = !fs::exists(args.csvPath);
            std::ofstream csv(args.csvPath, std::ios::app);
            if (!csv) throw std::runtime_error("cannot open csv " + args.csvPath);
            if (fresh) {
                csv << "site,case,method,psnr,mssim";
                if (args.perBand)
                    for (std::size_t b = 0; b < report.perBandSsim.size(); ++b)
                        csv << ",ssim_band" << b;
                csv << "\n";
            }
            csv << row << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

struct DemoArgs {
    std::string outDir;
    std::uint64_t seed = 1;
    int caseId = 3;
    std::size_t width = 64, height = 64, bands = 3, scale = 8;
};

int cmdDemo(const DemoArgs& args) {
    SimulateArgs sim;
    sim.outDir = (fs::path(args.outDir) / "sim").string();
    sim.synthetic = {args.width, args.height, args.bands};
    sim.caseId = args.caseId;
    sim.seed = args.seed;
    sim.scale = args.scale;
    int rc = cmdSimulate(sim);
    if (rc != kExitOk) return rc;

    const NoiseCase nc = noiseCaseParams(args.caseId);
    FuseArgs fuse;
    fuse.hrRefPath = (fs::path(sim.outDir) / "hr_ref.f32").string();
    fuse.lrRefPath = (fs::path(sim.outDir) / "lr_ref.f32").string();
    fuse.lrTargetPath = (fs::path(sim.outDir) / "lr_target.f32").string();
    fuse.outDir = (fs::path(args.outDir) / "fuse").string();
    fuse.scale = args.scale;
    fuse.preview = true;
    FusionParams params;
    params.sigmaH = nc.sigma;
    params.rH = nc.spRatio;
    FuseOverrides given;
    given.sigmaH = true;
    given.rH = true;
    rc = cmdFuse(fuse, params, given);
    if (rc != kExitOk) return rc;

    EvaluateArgs ev;
    ev.estimatePath = (fs::path(fuse.outDir) / "target_hr.f32").string();
    ev.truthPath = (fs::path(sim.outDir) / "hr_target_truth.f32").string();
    ev.csvPath = (fs::path(args.outDir) / "metrics.csv").string();
    ev.site = "demo";
    ev.caseName = "case" + std::to_string(args.caseId);
    return cmdEvaluate(ev);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise-robust spatiotemporal fusion of satellite rasters"};
    app.require_subcommand(1);

    FuseArgs fuseArgs;
    FusionParams cliParams;
    std::string qName = "l12";
    CLI::App* fuse = app.add_subcommand("fuse", "Fuse one HR/LR reference pair and a target LR");
    fuse->add_option("--hr-ref", fuseArgs.hrRefPath, "Reference HR raster")->required();
    fuse->add_option("--lr-ref", fuseArgs.lrRefPath, "Reference LR raster")->required();
    fuse->add_option("--lr-target", fuseArgs.lrTargetPath, "Target LR raster")->required();
    fuse->add_option("--scale", fuseArgs.scale, "HR/LR resolution ratio")->required();
    fuse->add_option("--out", fuseArgs.outDir, "Output directory")->required();
    fuse->add_option("--sigma-h", cliParams.sigmaH, "Gaussian noise std of the HR reference");
    fuse->add_option("--r-h", cliParams.rH, "Sparse-noise ratio of the HR reference");
    fuse->add_option("--r-l", cliParams.rL, "Sparse-noise ratio of the LR images");
    fuse->add_option("--delta", cliParams.delta, "Weight sensitivity");
    fuse->add_option("--k", cliParams.kZero, "Weights zeroed per pixel (1..4)");
    fuse->add_option("--c-alpha", cliParams.cAlpha, "Edge-constraint coefficient");
    fuse->add_option("--lambda", cliParams.lambda, "Target-regularizer balance");
    fuse->add_option("--q", qName, "Edge-constraint norm: l1, l2 or l12");
    fuse->add_option("--max-iter", cliParams.maxIter, "Iteration cap");
    fuse->add_option("--tol", cliParams.tolRel, "Relative-change tolerance");
    fuse->add_option("--config", fuseArgs.configPath, "JSON parameter file");
    fuse->add_flag("--preview", fuseArgs.preview, "Write an 8-bit PNG preview");
    fuse->add_option("--preview-bands", fuseArgs.previewBands, "Three band indices")
        ->expected(3);
    fuse->add_flag("--export-guide", fuseArgs.exportGuide,
                   "Also write the guide image and the four weight planes");

    SimulateArgs simArgs;
    CLI::App* sim = app.add_subcommand("simulate", "Generate a degraded observation corpus");
    sim->add_option("--out", simArgs.outDir, "Output directory")->required();
    sim->add_option("--case", simArgs.caseId, "Noise case 1..4")->required();
    sim->add_option("--seed", simArgs.seed, "RNG seed");
    sim->add_option("--scale", simArgs.scale, "HR/LR resolution ratio")->required();
    sim->add_option("--synthetic", simArgs.synthetic, "Synthetic scene W H B")->expected(3);
    sim->add_option("--hr-ref", simArgs.hrRefPath, "Clean reference HR raster");
    sim->add_option("--hr-target", simArgs.hrTargetPath, "Clean target HR raster");

    EvaluateArgs evalArgs;
    CLI::App* ev = app.add_subcommand("evaluate", "Score an estimate against ground truth");
    ev->add_option("--estimate", evalArgs.estimatePath, "Estimated raster")->required();
    ev->add_option("--truth", evalArgs.truthPath, "Ground-truth raster")->required();
    ev->add_option("--csv", evalArgs.csvPath, "Append a CSV row here");
    ev->add_option("--site", evalArgs.site, "Site label");
    ev->add_option("--case", evalArgs.caseName, "Case label");
    ev->add_option("--method", evalArgs.method, "Method label");
    ev->add_flag("--per-band", evalArgs.perBand, "Append per-band SSIM columns");

    DemoArgs demoArgs;
    CLI::App* demo = app.add_subcommand("demo", "Simulate, fuse and evaluate in one run");
    demo->add_option("--out", demoArgs.outDir, "Output directory")->required();
    demo->add_option("--seed", demoArgs.seed, "RNG seed");
    demo->add_option("--case", demoArgs.caseId, "Noise case 1..4");
    demo->add_option("--width", demoArgs.width, "Scene width");
    demo->add_option("--height", demoArgs.height, "Scene height");
    demo->add_option("--bands", demoArgs.bands, "Scene bands");
    demo->add_option("--scale", demoArgs.scale, "HR/LR resolution ratio");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (fuse->parsed()) {
            cliParams.qNorm = qNormFromName(qName);
            FuseOverrides given;
            given.sigmaH = fuse->count("--sigma-h") > 0;
            given.rH = fuse->count("--r-h") > 0;
            given.rL = fuse->count("--r-l") > 0;
            given.delta = fuse->count("--delta") > 0;
            given.kZero = fuse->count("--k") > 0;
            given.cAlpha = fuse->count("--c-alpha") > 0;
            given.lambda = fuse->count("--lambda") > 0;
            given.qNorm = fuse->count("--q") > 0;
            given.maxIter = fuse->count("--max-iter") > 0;
            given.tolRel = fuse->count("--tol") > 0;
            return cmdFuse(fuseArgs, cliParams, given);
        }
        if (sim->parsed()) return cmdSimulate(simArgs);
        if (ev->parsed()) return cmdEvaluate(evalArgs);
        if (demo->parsed()) return cmdDemo(demoArgs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
