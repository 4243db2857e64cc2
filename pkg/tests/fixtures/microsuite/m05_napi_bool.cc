// entry: Toggle
// category: different APIs (N-API booleans, descriptor registration)
#include <node_api.h>

static napi_value Toggle(napi_env env, napi_callback_info info) {
  size_t argc = 1;
  napi_value argv[1];
  napi_status s = napi_get_cb_info(env, info, &argc, argv, NULL, NULL);
  if (s != napi_ok) return NULL;
  bool flag = false;
  napi_get_value_bool(env, argv[0], &flag);  // sink: tainted
  napi_value result;
  napi_get_boolean(env, !flag, &result);
  return result;
}
