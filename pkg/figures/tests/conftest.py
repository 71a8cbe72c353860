"""Hand-written fixture CSVs matching the simulator's documented schemas."""

import pytest


def _write(path, text):
    path.write_text(text.lstrip())
    return str(path)


@pytest.fixture()
def contour_csv(tmp_path):
    # 3x3 grid, center cell masked (sits on a node), one negative soeb cell
    # exercises the log-scale masking.
    return _write(tmp_path / "contour.csv", """
x,y,mask,speb,soeb
-10,-10,0,100,1
0,-10,0,50,1
10,-10,0,25,1
-10,0,0,80,1
0,0,1,,
10,0,0,20,1
-10,10,0,60,1
0,10,0,40,1
10,10,0,30,1
""")


@pytest.fixture()
def layout_csv(tmp_path):
    return _write(tmp_path / "layout.csv", """
kind,x,y,orientation
dl_rru,-10,0,1.5707963
ul_rru,10,0,-1.5707963
dl_user,3,4,
ul_user,-3,-4,
target,0,8,
""")


@pytest.fixture()
def sweep_csv(tmp_path):
    rows = ["variable,value,n_antennas,f1,std_err,f2,speb,soeb"]
    for n, scale in ((4, 4.0), (8, 2.0), (16, 1.0)):
        for v, f1 in ((0.1, 5.0), (0.5, 6.0), (0.9, 6.5)):
            rows.append(f"pilot,{v},{n},{f1},0.01,{1e-3 / scale},"
                        f"{scale * 200 / v},{scale * 2 / v}")
    return _write(tmp_path / "sweep.csv", "\n".join(rows) + "\n")


@pytest.fixture()
def pareto_csv(tmp_path):
    return _write(tmp_path / "pareto.csv", """
source,f1,f2,speb,soeb,gene_0,gene_1
front,7.2,1e-19,9e18,2e16,0.1,0.2
front,7.0,3e-19,4e18,1e16,0.2,0.3
front,6.5,6e-19,2e18,8e15,0.3,0.4
front,6.0,9e-19,1e18,5e15,0.4,0.5
epa,6.7,2e-19,5e18,1e16,0.25,0.25
dqn,7.1,2.5e-19,4.5e18,9e15,0.22,0.33
""")


@pytest.fixture()
def schemes_csv(tmp_path):
    rows = ["scheme,sensing_symbols,t_sense,t_ul,t_dl,duplex,sum_rate,speb,soeb"]
    for s in (10, 100):
        half = (1 - s / 200) / 2
        rows.append(f"nafd_isac,{s},0,0.5,0.5,1,6.8,1e17,1e15")
        rows.append(f"tdd_nafd_isac,{s},{s / 200},{half},{half},1,"
                    f"{6.0 * (1 - s / 200)},{2e18 / s},{2e16 / s}")
        rows.append(f"tdd_isac,{s},{s / 200},{half},{half},0,"
                    f"{3.0 * (1 - s / 200)},{2e18 / s},{2e16 / s}")
    return _write(tmp_path / "schemes.csv", "\n".join(rows) + "\n")


@pytest.fixture()
def dqn_trace_csv(tmp_path):
    rows = ["episode,mean_reward,best_reward"]
    best = 0.0
    for e in range(5):
        mean = 10.0 + 2.0 * e
        best = max(best, mean + 1.0)
        rows.append(f"{e},{mean},{best}")
    return _write(tmp_path / "dqn_trace.csv", "\n".join(rows) + "\n")


@pytest.fixture()
def broken_contour_csv(tmp_path):
    # Same shape as contour.csv but the bound column carries the wrong name.
    return _write(tmp_path / "broken.csv", """
x,y,mask,bound,soeb
0,0,0,1,1
1,0,0,2,1
""")
