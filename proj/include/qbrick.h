/* qbrick C API: brick-wall compilation of quantum circuits over tensor
 * networks, behind opaque handles.
 *
 * Every function returns QBK_OK or an error code; qbk_last_error() holds a
 * thread-local description of the most recent failure. Strings returned
 * through char** are heap-allocated and released with qbk_string_free().
 * Configuration documents are JSON; see the README for the schema.
 */
#ifndef QBRICK_H
#define QBRICK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define QBK_OK 0
#define QBK_ERR_INVALID 1
#define QBK_ERR_SHAPE 2
#define QBK_ERR_DOMAIN 3
#define QBK_ERR_TOPOLOGY 4
#define QBK_ERR_PLAN 5
#define QBK_ERR_DECOMPOSITION 6
#define QBK_ERR_UNSUPPORTED_GATE 7
#define QBK_ERR_IO 8
#define QBK_ERR_INTERNAL 9

typedef struct qbk_circuit qbk_circuit;
typedef struct qbk_report qbk_report;

const char* qbk_version(void);
const char* qbk_last_error(void);

void qbk_string_free(char* s);
void qbk_circuit_free(qbk_circuit* c);
void qbk_report_free(qbk_report* r);

/* --- target builders --- */
int qbk_circuit_ising(int n, double tau, int steps, qbk_circuit** out);
int qbk_circuit_ising_grid(int rows, int cols, double tau, int steps, qbk_circuit** out);
int qbk_circuit_qft(int n, qbk_circuit** out);
int qbk_circuit_aqft(int n, int k_max, qbk_circuit** out);
int qbk_circuit_haar(int n, int depth, uint64_t seed, qbk_circuit** out);

/* --- inspection --- */
int qbk_circuit_num_qubits(const qbk_circuit* c, int* out);
int qbk_circuit_depth_units(const qbk_circuit* c, int* out);
int qbk_circuit_two_qubit_gates(const qbk_circuit* c, long long* out);
/* CNOT-equivalent cost of compiling the target conventionally */
int qbk_circuit_target_cnots(const qbk_circuit* c, long long* out);
int qbk_aqft_cnot_count(int n, int k_max, long long* out);

/* --- formats --- */
int qbk_circuit_to_json(const qbk_circuit* c, char** out);
int qbk_circuit_from_json(const char* text, qbk_circuit** out);
/* QBK_ERR_UNSUPPORTED_GATE when a gate has no OpenQASM 2.0 form */
int qbk_circuit_to_qasm(const qbk_circuit* c, char** out);
int qbk_circuit_from_qasm(const char* text, qbk_circuit** out);

/* --- analyses ---
 * options/config are JSON documents; NULL or "" selects all defaults. */
int qbk_ee_trace(const qbk_circuit* c, const char* options_json, char** out_json);
int qbk_compile(const qbk_circuit* c, const char* config_json, qbk_report** out);
int qbk_sweep(const qbk_circuit* c, const char* config_json, qbk_report** out);
int qbk_aqft_baseline(int n, const char* config_json, char** out_json);

/* --- reports --- */
int qbk_report_json(const qbk_report* r, char** out);
/* depth-sweep reports only: the plotting CSV companion */
int qbk_report_csv(const qbk_report* r, char** out);
int qbk_report_part_count(const qbk_report* r, int* out);
/* compiled brick-wall circuit of one part of a compile report */
int qbk_report_part_circuit(const qbk_report* r, int part, qbk_circuit** out);

#ifdef __cplusplus
}
#endif

#endif /* QBRICK_H */
