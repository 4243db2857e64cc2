// entry: Compress
// category: macros (conversion hidden in a macro body)
#include <node_api.h>

#define GET_STRING_ARG(idx, out, cap) \
  napi_get_value_string_utf8(env, argv[idx], out, cap, NULL)

napi_value Compress(napi_env env, napi_callback_info info) {
  size_t argc = 1;
  napi_value argv[1];
  napi_get_cb_info(env, info, &argc, argv, NULL, NULL);
  char input[1024];
  GET_STRING_ARG(0, input, sizeof(input));  // sink: tainted
  napi_value out;
  napi_create_string_utf8(env, input, NAPI_AUTO_LENGTH, &out);
  return out;
}
