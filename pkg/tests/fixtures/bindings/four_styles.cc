// The same function Foo exposed as "foo" through each supported binding API.
void RegisterNan(v8::Local<v8::Object> module) {
  // Node.js-Nan
  Set(module, New<v8::String>("foo"),
        New<v8::FunctionTemplate>(Foo));
}

napi_value RegisterNapi(napi_env env, napi_value exports) {
  // Node.js-N-API
  napi_define_properties(...,{"foo",...,Foo,...});
  return exports;
}

void Init_foo(void) {
  // Ruby
  rb_define_method(module,"foo",Foo,1);
}

PyMODINIT_FUNC PyInit_foo(void) {
  // Python
  PyModule_Create({...,{"foo",(PyCFunction)Foo},...});
}
