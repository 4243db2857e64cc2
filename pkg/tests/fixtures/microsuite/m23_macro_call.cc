// entry: Sleep
// category: macros (status-checking wrapper macro)
#include <node_api.h>

#define NAPI_CALL(env, call)                                  \
  do {                                                        \
    napi_status status = (call);                              \
    if (status != napi_ok) {                                  \
      napi_throw_error((env), NULL, "napi call failed");      \
      return NULL;                                            \
    }                                                         \
  } while (0)

napi_value Sleep(napi_env env, napi_callback_info info) {
  size_t argc = 1;
  napi_value argv[1];
  NAPI_CALL(env, napi_get_cb_info(env, info, &argc, argv, NULL, NULL));
  uint32_t ms;
  NAPI_CALL(env, napi_get_value_uint32(env, argv[0], &ms));  // sink: tainted
  usleep(ms * 1000);
  return NULL;
}
