#include "infodens/cli.hpp"
#include "infodens/csv.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <streambuf>
#include <string>
#include <vector>

using namespace infodens;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

using Table = std::vector<std::vector<std::string>>;

// Plain split; the numeric outputs never need quoting.
Table parse_csv(const std::string& text)
{
    Table t;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        t.push_back(cli::split(line, ','));
    }
    return t;
}

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

std::filesystem::path temp_file(const std::string& name, const std::string& content)
{
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << content;
    return p;
}

const char* kKmsJson = R"({
  "p": 2, "q": 2,
  "r_x":  [[1.0, 0.5], [0.5, 1.0]],
  "r_y":  [[1.0, 0.5], [0.5, 1.0]],
  "r_xy": [[0.25, 0.5], [0.125, 0.25]]
})";

// Counts bytes and lines as they arrive.
class CountingBuf : public std::streambuf {
public:
    std::size_t bytes = 0;
    std::size_t lines = 0;

protected:
    int overflow(int c) override
    {
        if (c != traits_type::eof()) {
            ++bytes;
            lines += c == '\n';
        }
        return c;
    }
    std::streamsize xsputn(const char* s, std::streamsize n) override
    {
        for (std::streamsize i = 0; i < n; ++i) {
            overflow(s[i]);
        }
        return n;
    }
};

} // namespace

TEST(Cli, RhoListIsSortedAndReported)
{
    const auto r = run({"cca", "--rho", "0.3,0.9"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto t = parse_csv(r.out);
    ASSERT_EQ(t[0], (std::vector<std::string>{"quantity", "value"}));
    EXPECT_EQ(t[1][0], "r");
    EXPECT_EQ(t[1][1], "2");
    EXPECT_EQ(t[3][0], "rho_1");
    EXPECT_EQ(num(t[3][1]), 0.9);
    EXPECT_EQ(num(t[4][1]), 0.3);
}

TEST(Cli, KmsJsonGivesRankOne)
{
    const auto p = temp_file("infodens_kms.json", kKmsJson);
    const auto r = run({"cca", "--cov", p.string()});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto t = parse_csv(r.out);
    EXPECT_EQ(t[1][1], "1");
    EXPECT_NEAR(num(t[3][1]), 0.5, 1e-14);
    const auto k = run({"cca", "--kms", "0.5", "2", "2"});
    EXPECT_EQ(k.code, cli::kExitOk);
    EXPECT_NEAR(num(parse_csv(k.out)[3][1]), 0.5, 1e-14);
}

TEST(Cli, AwgnBrownianSpectrum)
{
    const auto r = run({"cca", "--awgn-brownian", "T=1", "r=5"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto t = parse_csv(r.out);
    EXPECT_EQ(t[1][1], "5");
    const auto s = awgn_brownian_spectrum(1.0, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(num(t[3 + i][1]), s[i]);
    }
}

TEST(Cli, CdfMiddleRowIsHalf)
{
    const auto r = run({"cdf", "--rho", "0.5,0.5", "--grid", "-3,3,7"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto t = parse_csv(r.out);
    ASSERT_EQ(t.size(), 8u);
    EXPECT_EQ(t[0], (std::vector<std::string>{"x", "value", "error_bound", "n_terms"}));
    EXPECT_EQ(num(t[4][0]), 0.0);
    EXPECT_EQ(num(t[4][1]), 0.5);
}

TEST(Cli, MomentsVariance)
{
    const auto r = run({"moments", "--rho", "0.6,0.8", "--m", "2"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto t = parse_csv(r.out);
    EXPECT_EQ(t[0], (std::vector<std::string>{"m", "value"}));
    EXPECT_EQ(t[1][0], "2");
    EXPECT_NEAR(num(t[1][1]), 1.0, 1e-15);
}

TEST(Cli, RequiredTermsTable)
{
    const auto r = run({"required-terms", "--awgn-brownian", "T=1", "--r", "2,5,10", "--target", "1e-2", "--kind",
                        "both"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto t = parse_csv(r.out);
    ASSERT_EQ(t.size(), 7u);
    EXPECT_EQ(t[0], (std::vector<std::string>{"r", "kind", "n"}));
    EXPECT_EQ(t[1], (std::vector<std::string>{"2", "pdf", "15"}));
    EXPECT_EQ(t[2], (std::vector<std::string>{"2", "cdf", "20"}));
    EXPECT_EQ(t[3], (std::vector<std::string>{"5", "pdf", "141"}));
    EXPECT_EQ(t[6], (std::vector<std::string>{"10", "cdf", "886"}));
}

TEST(Cli, PoleIsReportedAsInfinity)
{
    const auto r = run({"pdf", "--rho", "0.7", "--grid", "-1,1,3"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(parse_csv(r.out)[2][1], "inf");
}

TEST(Cli, AbsoluteGrid)
{
    const auto s = CanonicalSpectrum::from_correlations({0.9, 0.3});
    const double info = s.mutual_information();
    std::ostringstream g;
    g << csv::format_number(info - 1.0) << ',' << csv::format_number(info + 1.0) << ",3";
    const auto a = run({"pdf", "--rho", "0.9,0.3", "--grid", g.str(), "--absolute"});
    const auto c = run({"pdf", "--rho", "0.9,0.3", "--grid", "-1,1,3"});
    ASSERT_EQ(a.code, cli::kExitOk) << a.err;
    EXPECT_NEAR(num(parse_csv(a.out)[2][0]), info, 1e-15);
    EXPECT_NEAR(num(parse_csv(a.out)[2][1]), num(parse_csv(c.out)[2][1]), 1e-14);
}

TEST(Cli, DirectAndFastMethodsAgree)
{
    const auto f = parse_csv(run({"pdf", "--rho", "0.8,0.5,0.2", "--grid", "-2,2,9", "--target", "1e-10"}).out);
    const auto d = parse_csv(
        run({"pdf", "--rho", "0.8,0.5,0.2", "--grid", "-2,2,9", "--target", "1e-10", "--method", "direct"}).out);
    ASSERT_EQ(f.size(), d.size());
    for (std::size_t i = 1; i < f.size(); ++i) {
        EXPECT_NEAR(num(f[i][1]), num(d[i][1]), 1e-9);
        EXPECT_LE(num(d[i][2]), 1e-10);
    }
}

TEST(Cli, EqualFlagMatchesCovarianceDocument)
{
    const auto p = temp_file("infodens_equal.json", R"({"p": 3, "q": 3,
      "r_x": [[1,0,0],[0,1,0],[0,0,1]],
      "r_y": [[2,0,0],[0,2,0],[0,0,2]],
      "r_xy": [[0.5656854249492381,0,0],[0,0.5656854249492381,0],[0,0,0.5656854249492381]]})");
    for (const char* cmd : {"pdf", "cdf"}) {
        const auto e = parse_csv(run({cmd, "--equal", "0.4", "3", "--grid", "-2,2,11"}).out);
        const auto r = run({cmd, "--cov", p.string(), "--grid", "-2,2,11"});
        ASSERT_EQ(r.code, cli::kExitOk) << r.err;
        const auto c = parse_csv(r.out);
        ASSERT_EQ(e.size(), c.size());
        for (std::size_t i = 1; i < e.size(); ++i) {
            EXPECT_NEAR(num(e[i][1]), num(c[i][1]), 1e-12) << cmd << " row " << i;
        }
    }
}

TEST(Cli, InputErrorsExitTwo)
{
    EXPECT_EQ(run({"cca", "--rho", "0.5,1.2"}).code, cli::kExitInput);
    EXPECT_EQ(run({"cca", "--rho", "abc"}).code, cli::kExitInput);
    EXPECT_EQ(run({"cca"}).code, cli::kExitInput);
    EXPECT_EQ(run({"cca", "--rho", "0.5", "--equal", "0.5", "2"}).code, cli::kExitInput);
    EXPECT_EQ(run({}).code, cli::kExitInput);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitInput);
    EXPECT_EQ(run({"pdf", "--rho", "0.5,0.3", "--grid", "1,0,5"}).code, cli::kExitInput);
    EXPECT_EQ(run({"pdf", "--rho", "0.5,0.3", "--grid", "-1,1,1"}).code, cli::kExitInput);
    EXPECT_EQ(run({"pdf", "--rho", "0.5,0.3", "--target", "0"}).code, cli::kExitInput);
    EXPECT_EQ(run({"pdf", "--rho", "0.5,0.3", "--method", "magic"}).code, cli::kExitInput);
    EXPECT_EQ(run({"moments", "--rho", "0.5", "--m", "0"}).code, cli::kExitInput);
    EXPECT_EQ(run({"sample", "--rho", "0.5", "--n", "0"}).code, cli::kExitInput);
    EXPECT_EQ(run({"cca", "--cov", "/nonexistent/infodens.json"}).code, cli::kExitInput);
    EXPECT_EQ(run({"required-terms", "--rho", "0.5,0.5", "--target", "1e-2"}).code, cli::kExitInput);
    const auto r = run({"cca", "--rho", "0.5,1.2"});
    EXPECT_NE(r.err.find("infodens:"), std::string::npos);
}

TEST(Cli, CovarianceSchemaErrors)
{
    const std::vector<std::string> bad{
        "not json",
        "[1, 2]",
        R"({"p": 1, "q": 1, "r_x": [[1]], "r_y": [[1]]})",
        R"({"p": 1, "q": 1, "r_x": [[1]], "r_y": [[1]], "r_xy": [[0.5]], "extra": 1})",
        R"({"p": 2, "q": 1, "r_x": [[1]], "r_y": [[1]], "r_xy": [[0.5]]})",
        R"({"p": 1, "q": 1, "r_x": [["a"]], "r_y": [[1]], "r_xy": [[0.5]]})",
        R"({"p": 0, "q": 1, "r_x": [], "r_y": [[1]], "r_xy": []})",
        R"({"p": 2, "q": 1, "r_x": [[1, 2], [2, 1]], "r_y": [[1]], "r_xy": [[0.1], [0.1]]})",
    };
    for (std::size_t i = 0; i < bad.size(); ++i) {
        const auto p = temp_file("infodens_bad_" + std::to_string(i) + ".json", bad[i]);
        EXPECT_EQ(run({"cca", "--cov", p.string()}).code, cli::kExitInput) << bad[i];
    }
    EXPECT_THROW(cli::parse_covariance_json(bad[3]), InputError);
}

TEST(Cli, NumericalFailureExitsThree)
{
    const auto r = run({"pdf", "--awgn-brownian", "T=1", "r=15", "--target", "1e-8", "--max-terms", "10"});
    EXPECT_EQ(r.code, cli::kExitNumerical);
    EXPECT_NE(r.err.find("numerical"), std::string::npos);
}

TEST(Cli, UnwritableOutputExitsTwo)
{
    EXPECT_EQ(run({"cca", "--rho", "0.5", "--out", "/nonexistent/dir/out.csv"}).code, cli::kExitInput);
}

TEST(Cli, OutputFile)
{
    const auto p = std::filesystem::temp_directory_path() / "infodens_out.csv";
    std::filesystem::remove(p);
    const auto r = run({"moments", "--rho", "0.5", "--m", "2,4", "--out", p.string()});
    ASSERT_EQ(r.code, cli::kExitOk);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto t = parse_csv(ss.str());
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[1][0], "2");
    EXPECT_EQ(num(t[1][1]), 0.25);
    EXPECT_NEAR(num(t[2][1]), 0.5625, 1e-15);
}

TEST(Cli, ValidatePassesAndIsDeterministic)
{
    const std::vector<std::string> args{"validate", "--rho", "0.9,0.3", "--n", "50000", "--seed", "7"};
    const auto a = run(args);
    ASSERT_EQ(a.code, cli::kExitOk) << a.out << a.err;
    const auto b = run({"validate", "--rho", "0.9,0.3", "--n", "50000", "--seed", "7", "--threads", "3"});
    EXPECT_EQ(a.out, b.out);
    const auto t = parse_csv(a.out);
    EXPECT_EQ(t[0], (std::vector<std::string>{"check", "statistic", "threshold", "result"}));
    for (std::size_t i = 1; i < t.size(); ++i) {
        EXPECT_EQ(t[i][3], "pass") << t[i][0];
    }
    const auto one = parse_csv(run({"validate", "--rho", "0.6", "--n", "20000"}).out);
    EXPECT_EQ(one.back()[3], "skip");
}

TEST(Cli, SampleIsReproducible)
{
    const auto a = run({"sample", "--rho", "0.9,0.3", "--n", "1000", "--seed", "3"});
    const auto b = run({"sample", "--rho", "0.9,0.3", "--n", "1000", "--seed", "3"});
    const auto c = run({"sample", "--rho", "0.9,0.3", "--n", "1000", "--seed", "3", "--construction", "joint"});
    ASSERT_EQ(a.code, cli::kExitOk);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
    EXPECT_EQ(parse_csv(a.out).size(), 1001u);
}

TEST(Cli, BenchReportsBothMethods)
{
    const auto r = run({"bench", "--rho", "0.9,0.3", "--grid", "-2,2,11", "--target", "1e-6"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto t = parse_csv(r.out);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0][0], "method");
    EXPECT_EQ(t[1][0], "direct");
    EXPECT_EQ(t[2][0], "fast");
}

TEST(Csv, NumbersRoundTripAtSeventeenDigits)
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0, 5e-324}) {
        std::ostringstream os;
        csv::Writer w(os, {"a"});
        w.row({v});
        const auto t = parse_csv(os.str());
        EXPECT_EQ(num(t[1][0]), v);
    }
    EXPECT_EQ(csv::format_number(std::nan("")), "nan");
    EXPECT_EQ(csv::format_number(-INFINITY), "-inf");
}

TEST(Csv, HeaderOnlyAndQuoting)
{
    std::ostringstream os;
    {
        csv::Writer w(os, {"x", "value"});
    }
    EXPECT_EQ(os.str(), "x,value\n");
    std::ostringstream q;
    csv::Writer w(q, {"name"});
    w.row({std::string("a,\"b\"")});
    EXPECT_EQ(q.str(), "name\n\"a,\"\"b\"\"\"\n");
    EXPECT_THROW(w.row({1.0, 2.0}), InputError);
}

TEST(Csv, MillionRowsStreamThroughWithoutBuffering)
{
    CountingBuf buf;
    std::ostream os(&buf);
    csv::Writer w(os, {"i", "value"});
    std::size_t after_first = 0;
    for (long long i = 0; i < 1'000'000; ++i) {
        w.row({i, 0.5 * static_cast<double>(i)});
        if (i == 0) {
            after_first = buf.lines;
        }
    }
    // each row reaches the sink as soon as it is written
    EXPECT_EQ(after_first, 2u);
    EXPECT_EQ(buf.lines, 1'000'001u);

    CountingBuf cli_buf;
    std::ostream cli_os(&cli_buf);
    std::ostringstream err;
    ASSERT_EQ(cli::run({"sample", "--rho", "0.5", "--n", "1000000"}, cli_os, err), cli::kExitOk);
    EXPECT_EQ(cli_buf.lines, 1'000'001u);
}

TEST(Csv, FailedWriteIsAnInputError)
{
    std::ostringstream os;
    csv::Writer w(os, {"a"});
    os.setstate(std::ios::badbit);
    EXPECT_THROW(w.row({1.0}), InputError);
}
