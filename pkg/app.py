import hmac
import os
import time
from functools import wraps

from flask import Flask, g, jsonify, request
from werkzeug.exceptions import HTTPException, RequestEntityTooLarge

from pareto_core import ContractViolation, PointSet, dedup, oracle_pareto
from pareto_filters import Algorithm, TreeKind, new_tree, pareto_sum, pareto_union, run_filter
from performance_monitor import monitor, track_run

if os.getenv("RENDER") is None:
    from dotenv import load_dotenv
    load_dotenv()

API_TOKEN = (os.getenv("PARETO_API_TOKEN") or "").strip()
MAX_INPUT_POINTS = int(os.getenv("PARETO_MAX_INPUT_POINTS") or "200000")
MAX_REQUEST_BYTES = int(os.getenv("PARETO_MAX_REQUEST_MB") or "64") * 1024 * 1024
DEFAULT_TREE = (os.getenv("PARETO_DEFAULT_TREE") or TreeKind.QND_PLUS.value).strip().lower()
DEFAULT_LEAF_CAPACITY = int(os.getenv("PARETO_DEFAULT_LEAF_CAPACITY") or "8")

app = Flask(__name__)
app.config["MAX_CONTENT_LENGTH"] = MAX_REQUEST_BYTES


class ApiError(Exception):
    def __init__(self, message, status=400):
        super().__init__(message)
        self.message = message
        self.status = status


@app.before_request
def _track_request_start():
    g._req_start = time.time()


@app.after_request
def _track_request_end(response):
    start = getattr(g, "_req_start", None)
    if start is not None:
        duration_ms = (time.time() - start) * 1000
        monitor.record_endpoint(request.path, request.method, response.status_code, duration_ms)
    return response


@app.errorhandler(ApiError)
def _api_error(exc):
    app.logger.warning("Rejected %s %s: %s", request.method, request.path, exc.message)
    return jsonify({"error": exc.message}), exc.status


@app.errorhandler(ContractViolation)
def _contract_violation(exc):
    app.logger.warning("Rejected %s %s: %s", request.method, request.path, exc)
    return jsonify({"error": str(exc)}), 400


@app.errorhandler(RequestEntityTooLarge)
def _too_large(exc):
    app.logger.warning("Rejected oversized request body for %s", request.path)
    return jsonify({"error": "Request body too large"}), 413


@app.errorhandler(Exception)
def _unexpected(exc):
    if isinstance(exc, HTTPException):
        return exc
    app.logger.exception("Unhandled error on %s %s", request.method, request.path)
    return jsonify({"error": "Internal server error"}), 500


def require_auth(f):
    @wraps(f)
    def wrapped(*args, **kwargs):
        if API_TOKEN:
            header = request.headers.get("Authorization") or ""
            scheme, _, token = header.partition(" ")
            if scheme.lower() != "bearer" or not hmac.compare_digest(token.strip(), API_TOKEN):
                app.logger.warning("Rejected unauthenticated request for %s", request.path)
                return jsonify({"error": "Unauthorized"}), 401
        return f(*args, **kwargs)
    return wrapped


def json_body():
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise ApiError("Expected a JSON object")
    return data


def parse_points(data, key, dim=None):
    rows = data.get(key)
    if not isinstance(rows, list):
        raise ApiError(f"'{key}' must be a list of points")
    if len(rows) > MAX_INPUT_POINTS:
        raise ApiError(f"'{key}' has {len(rows)} points, the limit is {MAX_INPUT_POINTS}", 413)
    for row in rows:
        if not isinstance(row, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            raise ApiError(f"'{key}' must contain lists of numbers")
    dim = dim if dim is not None else data.get("d")
    if dim is not None and (not isinstance(dim, int) or isinstance(dim, bool)):
        raise ApiError("'d' must be an integer")
    if not rows and dim is None:
        raise ApiError(f"'{key}' is empty; pass 'd' to give its dimensionality")
    return PointSet.of(rows, dim)


def parse_options(data, default_algorithm):
    algorithm = str(data.get("algorithm") or default_algorithm).strip().lower()
    tree = str(data.get("tree") or DEFAULT_TREE).strip().lower()
    m = data.get("m", DEFAULT_LEAF_CAPACITY)
    if algorithm not in {a.value for a in Algorithm}:
        raise ApiError(f"Unknown algorithm '{algorithm}'")
    if tree not in {t.value for t in TreeKind}:
        raise ApiError(f"Unknown tree '{tree}'")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ApiError("'m' must be a positive integer")
    return algorithm, tree, m


def require_pareto(points, key):
    unique = dedup(points)
    frontier = oracle_pareto(unique)
    if len(frontier) != len(unique):
        raise ApiError(f"'{key}' is not a Pareto set; symnd needs Pareto inputs")
    return frontier


@track_run("{algorithm}/{tree}")
def run_operation(op, a, b=None, *, algorithm, tree, m):
    if op == "union":
        return pareto_union(a, b, algorithm, tree, m)
    if op == "sum":
        return pareto_sum(a, b, algorithm, tree, m)
    return run_filter(a, algorithm, tree, m)


def frontier_response(op, result, algorithm, tree, m, source=None):
    app.logger.info(
        "%s %s/%s m=%d: %d frontier points, %d comparisons",
        op, algorithm, tree, m, len(result.frontier), result.stats.comparisons,
    )
    body = {
        "frontier": [list(p) for p in result.frontier],
        "size": len(result.frontier),
        "algorithm": algorithm,
        "tree": tree,
        "m": m,
        "stats": result.stats.as_dict(),
    }
    if source is not None:
        body["verified"] = oracle_pareto(dedup(source)).same_points(result.frontier)
    return jsonify(body)


@app.get("/health")
def health():
    return "ok", 200


@app.post("/api/filter")
@require_auth
def api_filter():
    data = json_body()
    algorithm, tree, m = parse_options(data, Algorithm.PRE_ND.value)
    if algorithm == Algorithm.SYM_ND.value:
        raise ApiError("symnd filters the union of two Pareto sets only")
    points = parse_points(data, "points")
    result = run_operation("filter", points, algorithm=algorithm, tree=tree, m=m)
    return frontier_response("filter", result, algorithm, tree, m,
                             points if data.get("verify") else None)


@app.post("/api/union")
@require_auth
def api_union():
    data = json_body()
    algorithm, tree, m = parse_options(data, Algorithm.SYM_ND.value)
    a = parse_points(data, "a")
    b = parse_points(data, "b", a.dim)
    if algorithm == Algorithm.SYM_ND.value:
        a, b = require_pareto(a, "a"), require_pareto(b, "b")
    result = run_operation("union", a, b, algorithm=algorithm, tree=tree, m=m)
    source = PointSet(a.dim, a.points + b.points) if data.get("verify") else None
    return frontier_response("union", result, algorithm, tree, m, source)


@app.post("/api/sum")
@require_auth
def api_sum():
    data = json_body()
    algorithm, tree, m = parse_options(data, Algorithm.PRE_ND.value)
    if algorithm == Algorithm.SYM_ND.value:
        raise ApiError("symnd filters the union of two Pareto sets only")
    a = parse_points(data, "a")
    b = parse_points(data, "b", a.dim)
    if len(a) * len(b) > MAX_INPUT_POINTS:
        raise ApiError(f"the sum has {len(a) * len(b)} points, the limit is {MAX_INPUT_POINTS}", 413)
    result = run_operation("sum", a, b, algorithm=algorithm, tree=tree, m=m)
    return frontier_response("sum", result, algorithm, tree, m)


@app.post("/api/tree-stats")
@require_auth
def api_tree_stats():
    data = json_body()
    _, tree, m = parse_options(data, Algorithm.PRE_ND.value)
    points = dedup(parse_points(data, "points"))
    index = new_tree(tree, points.dim, m).build(points)
    body = {"tree": tree, "m": m, **index.shape().as_dict()}
    if data.get("queries") is not None:
        queries = parse_points(data, "queries", points.dim)
        dominated = [index.dominated(q) for q in queries]
        body["dominated"] = dominated
    return jsonify(body)


@app.get("/api/perf/summary")
@require_auth
def perf_summary():
    stats = monitor.get_stats() or {}
    return jsonify({
        "uptime_seconds": round(stats.get("uptime_seconds", 0), 2),
        "requests": stats.get("requests", 0),
        "avg_duration_ms": round(stats.get("avg_duration_ms", 0), 2),
        "p95_duration_ms": round(stats.get("p95_duration_ms", 0), 2),
        "filter_runs": sum(len(records) for records in monitor.runs.values()),
    })


@app.get("/api/perf/stats")
@require_auth
def perf_stats():
    return jsonify(monitor.get_all_stats())


if __name__ == "__main__":
    port = int(os.environ.get("PORT", 5000))
    app.run(host="0.0.0.0", port=port, debug=False)
